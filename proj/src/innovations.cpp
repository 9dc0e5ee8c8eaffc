#include "weakdep/innovations.hpp"

#include <bit>
#include <cmath>
#include <numbers>

#include "weakdep/errors.hpp"
#include "weakdep/normal.hpp"

namespace weakdep {

namespace {

constexpr double two_pow_53_inv = 1.0 / 9007199254740992.0;

double to_open_unit(std::uint64_t w) { return (static_cast<double>(w >> 11) + 0.5) * two_pow_53_inv; }

double from_word(InnovationKind kind, std::uint64_t w) {
  const double u = to_open_unit(w);
  if (kind == InnovationKind::standard_gaussian) return normal_quantile(u);
  return std::sqrt(3.0) * (2.0 * u - 1.0);
}

bool bitwise(InnovationKind kind) {
  return kind == InnovationKind::rademacher || kind == InnovationKind::raw_bit;
}

double from_bit(InnovationKind kind, unsigned b) {
  if (kind == InnovationKind::raw_bit) return static_cast<double>(b);
  return b ? 1.0 : -1.0;
}

std::int64_t floor_shift(std::int64_t t, int s) { return t >> s; }  // arithmetic shift floors

}  // namespace

double InnovationLaw::mean() const { return kind == InnovationKind::raw_bit ? 0.5 : 0.0; }

double InnovationLaw::variance() const { return kind == InnovationKind::raw_bit ? 0.25 : 1.0; }

double InnovationLaw::skewness() const { return 0.0; }

double InnovationLaw::excess_kurtosis() const {
  switch (kind) {
    case InnovationKind::standard_gaussian: return 0.0;
    case InnovationKind::rademacher: return -2.0;
    case InnovationKind::centered_uniform: return -1.2;
    case InnovationKind::raw_bit: return -2.0;
  }
  return 0.0;
}

double InnovationLaw::abs_moment(double p) const {
  switch (kind) {
    case InnovationKind::standard_gaussian:
      return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
    case InnovationKind::rademacher: return 1.0;
    case InnovationKind::centered_uniform: return std::pow(std::sqrt(3.0), p) / (p + 1.0);
    case InnovationKind::raw_bit: return 0.5;
  }
  return 0.0;
}

std::string to_string(InnovationKind kind) {
  switch (kind) {
    case InnovationKind::standard_gaussian: return "standard-gaussian";
    case InnovationKind::rademacher: return "rademacher";
    case InnovationKind::centered_uniform: return "centered-uniform";
    case InnovationKind::raw_bit: return "raw-bit";
  }
  return "?";
}

InnovationKind innovation_kind_from_string(const std::string& name) {
  if (name == "standard-gaussian" || name == "gaussian") return InnovationKind::standard_gaussian;
  if (name == "rademacher") return InnovationKind::rademacher;
  if (name == "centered-uniform" || name == "uniform") return InnovationKind::centered_uniform;
  if (name == "raw-bit") return InnovationKind::raw_bit;
  throw PreconditionError("unknown innovation law '" + name + "'");
}

CoupledStream::CoupledStream(std::uint64_t seed, InnovationLaw law, std::uint64_t domain)
    : seed_(seed), domain_(domain), law_(law) {
  const std::uint64_t k = splitmix64(seed ^ splitmix64(domain + 0x632BE59BD9B4E019ULL));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

PhiloxCounter CoupledStream::block(std::uint64_t replication, Series series, std::int64_t index) const {
  const auto u = static_cast<std::uint64_t>(index);
  const std::uint32_t hi = static_cast<std::uint32_t>(replication >> 32) & 0x7FFFFFFFu;
  return philox4x32({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(u >> 32),
                     static_cast<std::uint32_t>(replication),
                     hi | (static_cast<std::uint32_t>(series) << 31)},
                    key_);
}

std::uint64_t CoupledStream::word(std::uint64_t replication, Series series, std::int64_t t) const {
  const PhiloxCounter b = block(replication, series, floor_shift(t, 1));
  const int lane = static_cast<int>(t & 1);
  return (static_cast<std::uint64_t>(b[2 * lane]) << 32) | b[2 * lane + 1];
}

double CoupledStream::uniform(std::uint64_t replication, Series series, std::int64_t t) const {
  return to_open_unit(word(replication, series, t));
}

unsigned CoupledStream::bit(std::uint64_t replication, Series series, std::int64_t t) const {
  const PhiloxCounter b = block(replication, series, floor_shift(t, 7));
  const int pos = static_cast<int>(t & 127);
  return (b[pos >> 5] >> (pos & 31)) & 1u;
}

double CoupledStream::value(std::uint64_t replication, Series series, std::int64_t t) const {
  if (bitwise(law_.kind)) return from_bit(law_.kind, bit(replication, series, t));
  return from_word(law_.kind, word(replication, series, t));
}

double CoupledStream::value(const StreamKey& key) const {
  if (key.experiment_seed != seed_) {
    return CoupledStream(key.experiment_seed, law_, domain_).value(key.replication, key.series, key.time);
  }
  return value(key.replication, key.series, key.time);
}

void CoupledStream::fill(std::uint64_t replication, Series series, std::int64_t t_first,
                         std::span<double> out) const {
  const auto n = static_cast<std::int64_t>(out.size());
  std::int64_t i = 0;
  if (bitwise(law_.kind)) {
    while (i < n) {
      const std::int64_t t = t_first + i;
      const PhiloxCounter b = block(replication, series, floor_shift(t, 7));
      int pos = static_cast<int>(t & 127);
      for (; pos < 128 && i < n; ++pos, ++i) {
        out[static_cast<std::size_t>(i)] = from_bit(law_.kind, (b[pos >> 5] >> (pos & 31)) & 1u);
      }
    }
    return;
  }
  while (i < n) {
    const std::int64_t t = t_first + i;
    const PhiloxCounter b = block(replication, series, floor_shift(t, 1));
    for (int lane = static_cast<int>(t & 1); lane < 2 && i < n; ++lane, ++i) {
      const std::uint64_t w = (static_cast<std::uint64_t>(b[2 * lane]) << 32) | b[2 * lane + 1];
      out[static_cast<std::size_t>(i)] = from_word(law_.kind, w);
    }
  }
}

std::int64_t CoupledStream::count_ones(std::uint64_t replication, Series series, std::int64_t t_first,
                                       std::int64_t count) const {
  std::int64_t ones = 0;
  std::int64_t t = t_first;
  const std::int64_t end = t_first + count;
  while (t < end) {
    const std::int64_t blk = floor_shift(t, 7);
    const std::int64_t blk_start = blk * 128;
    const int lo = static_cast<int>(t - blk_start);
    const int hi = static_cast<int>(std::min<std::int64_t>(end - blk_start, 128));
    const PhiloxCounter b = block(replication, series, blk);
    for (int w = lo >> 5; w <= (hi - 1) >> 5; ++w) {
      std::uint32_t word_bits = b[w];
      const int wlo = std::max(lo - 32 * w, 0);
      const int whi = std::min(hi - 32 * w, 32);
      std::uint32_t mask = whi >= 32 ? 0xFFFFFFFFu : ((1u << whi) - 1u);
      mask &= ~((1u << wlo) - 1u);
      ones += std::popcount(word_bits & mask);
    }
    t = blk_start + hi;
  }
  return ones;
}

CoupledStream CoupledStream::child(std::uint64_t tag) const { return child(tag, law_); }

CoupledStream CoupledStream::child(std::uint64_t tag, InnovationLaw law) const {
  return CoupledStream(seed_, law, splitmix64(domain_ ^ splitmix64(tag + 0x2545F4914F6CDD1DULL)));
}

InnovationWindow::InnovationWindow(CoupledStream stream, std::uint64_t replication, Series series,
                                   std::int64_t anchor, std::vector<double> values)
    : stream_(std::move(stream)),
      replication_(replication),
      series_(series),
      anchor_(anchor),
      values_(std::move(values)) {}

InnovationWindow draw_window(const CoupledStream& stream, std::uint64_t replication, Series series,
                             std::int64_t k, std::size_t depth) {
  if (depth < 1) throw PreconditionError("window depth must be at least 1");
  std::vector<double> asc(depth);
  stream.fill(replication, series, k - static_cast<std::int64_t>(depth) + 1, asc);
  std::vector<double> values(asc.rbegin(), asc.rend());
  return InnovationWindow(stream, replication, series, k, std::move(values));
}

InnovationWindow primed_window(const InnovationWindow& w, std::size_t l) {
  if (l >= w.depth()) {
    throw PreconditionError("filter lag " + std::to_string(l) + " outside window of depth " +
                            std::to_string(w.depth()));
  }
  InnovationWindow out = w;
  out.set(l, w.stream().value(w.replication(), Series::prime, w.anchor() - static_cast<std::int64_t>(l)));
  return out;
}

InnovationWindow starred_window(const InnovationWindow& w, std::size_t l) {
  if (l >= w.depth()) {
    throw PreconditionError("filter lag " + std::to_string(l) + " outside window of depth " +
                            std::to_string(w.depth()));
  }
  InnovationWindow out = w;
  const std::size_t count = w.depth() - l;
  std::vector<double> asc(count);
  w.stream().fill(w.replication(), Series::prime, w.anchor() - static_cast<std::int64_t>(w.depth()) + 1, asc);
  for (std::size_t i = 0; i < count; ++i) out.set(w.depth() - 1 - i, asc[i]);
  return out;
}

}  // namespace weakdep

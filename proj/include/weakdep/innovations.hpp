#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "weakdep/prf.hpp"

namespace weakdep {

enum class InnovationKind { standard_gaussian, rademacher, centered_uniform, raw_bit };

struct InnovationLaw {
  InnovationKind kind = InnovationKind::standard_gaussian;

  double mean() const;
  double variance() const;
  double skewness() const;
  double excess_kurtosis() const;
  // E|eps|^p, closed form for every kind.
  double abs_moment(double p) const;

  bool operator==(const InnovationLaw&) const = default;
};

std::string to_string(InnovationKind kind);
InnovationKind innovation_kind_from_string(const std::string& name);

enum class Series : std::uint8_t { base = 0, prime = 1 };

struct StreamKey {
  std::uint64_t experiment_seed = 0;
  std::uint64_t replication = 0;
  Series series = Series::base;
  std::int64_t time = 0;
};

// Keyed i.i.d. innovation source: value = PRF(seed, domain, replication, series, time).
// Gaussian and uniform draws use one 64-bit lane per time (two per Philox block);
// Rademacher and raw-bit draws use one bit per time (128 per block).
class CoupledStream {
 public:
  CoupledStream() = default;
  CoupledStream(std::uint64_t seed, InnovationLaw law, std::uint64_t domain = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t domain() const { return domain_; }
  const InnovationLaw& law() const { return law_; }

  double value(std::uint64_t replication, Series series, std::int64_t t) const;
  double value(const StreamKey& key) const;
  // out[i] = value(replication, series, t_first + i)
  void fill(std::uint64_t replication, Series series, std::int64_t t_first, std::span<double> out) const;

  // Uniform on (0,1) from the 64-bit lane at time t, regardless of law.
  double uniform(std::uint64_t replication, Series series, std::int64_t t) const;
  std::uint64_t word(std::uint64_t replication, Series series, std::int64_t t) const;
  // Single fair bit at time t (the Rademacher/raw-bit source).
  unsigned bit(std::uint64_t replication, Series series, std::int64_t t) const;
  // Number of ones among bits t_first .. t_first+count-1.
  std::int64_t count_ones(std::uint64_t replication, Series series, std::int64_t t_first,
                          std::int64_t count) const;

  // Independent keyed substream; the same tag always gives the same child.
  CoupledStream child(std::uint64_t tag) const;
  CoupledStream child(std::uint64_t tag, InnovationLaw law) const;

  // Raw Philox block; bits of times 128*index .. 128*index+127 in word order, LSB first.
  PhiloxCounter block(std::uint64_t replication, Series series, std::int64_t index) const;

 private:

  std::uint64_t seed_ = 0;
  std::uint64_t domain_ = 0;
  InnovationLaw law_{};
  PhiloxKey key_{};
};

// values[j] = eps_{anchor - j}, j = 0..depth-1.
class InnovationWindow {
 public:
  InnovationWindow(CoupledStream stream, std::uint64_t replication, Series series, std::int64_t anchor,
                   std::vector<double> values);

  std::int64_t anchor() const { return anchor_; }
  std::size_t depth() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  std::span<const double> values() const { return values_; }
  const CoupledStream& stream() const { return stream_; }
  std::uint64_t replication() const { return replication_; }
  Series series() const { return series_; }
  const InnovationLaw& law() const { return stream_.law(); }

  void set(std::size_t j, double v) { values_[j] = v; }

 private:
  CoupledStream stream_;
  std::uint64_t replication_;
  Series series_;
  std::int64_t anchor_;
  std::vector<double> values_;
};

InnovationWindow draw_window(const CoupledStream& stream, std::uint64_t replication, Series series,
                             std::int64_t k, std::size_t depth);

// Offset l replaced by the prime-series value at time anchor - l.
InnovationWindow primed_window(const InnovationWindow& w, std::size_t l);

// Offsets l..depth-1 replaced by prime-series values.
InnovationWindow starred_window(const InnovationWindow& w, std::size_t l);

}  // namespace weakdep

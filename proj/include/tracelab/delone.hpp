#pragma once

#include "tracelab/substitution.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tracelab {

// B_T = [-bT, bT] sampled at T = nu^n * T0 for phases T0 = nu^(k/K).
struct WindowSample {
  int n = 0;
  int phase = 0;
  double T = 0.0;
};

struct WindowFamily {
  double b = 1.0;
  double expansion = 1.0;
  int n_min = 0;
  int n_max = 0;
  int phases = 1;

  double phase_offset(int k) const;
  double volume(double T) const { return 2.0 * b * T; }
  // Ordered by n, then phase.
  std::vector<WindowSample> samples() const;
};

WindowFamily geometric_schedule(double expansion, int n_min, int n_max, int phases);

// Positions along the line. When every tile length is rational, coordinates
// are exact integers in units of 1/scale; otherwise they are doubles
// computed from exact letter counts.
class Coordinates {
 public:
  explicit Coordinates(const RealVector& lengths);
  bool exact() const { return exact_; }
  const Rational& unit() const { return unit_; }
  // Tile lengths in ticks (exact mode).
  const std::vector<std::int64_t>& ticks() const { return ticks_; }
  const std::vector<long double>& lengths() const { return lengths_; }
  // Largest tick value t with t * unit <= x.
  std::int64_t floor_ticks(double x) const;
  // Smallest tick value t with t * unit >= x.
  std::int64_t ceil_ticks(double x) const;

 private:
  bool exact_ = false;
  Rational unit_ = 1;
  std::vector<std::int64_t> ticks_;
  std::vector<long double> lengths_;
};

// Counts points of the limit Delone set by walking the supertile hierarchy,
// so windows far beyond memory are cheap.
class SupertileCounter {
 public:
  SupertileCounter(const SubstitutionRule& rule, const Seed& seed);

  // Per-letter counts of points with coordinate in [0, x].
  std::vector<long> right_counts(double x) const;
  // Per-letter counts of points with coordinate in [-x, 0).
  std::vector<long> left_counts(double x) const;
  // Per-letter counts in the closed window [-T, T].
  std::vector<long> counts(double T) const;

 private:
  struct Level {
    std::vector<std::int64_t> ticks;   // exact supertile lengths
    std::vector<long double> length;   // approximate supertile lengths
    std::vector<std::vector<long>> counts;  // counts[a] = M^d e_a
  };
  void grow_to(double x) const;
  template <bool Right>
  void walk(Letter a, std::size_t depth, std::int64_t budget_ticks, long double budget, std::vector<long>& out) const;
  std::vector<long> side_counts(double x, bool right) const;

  SubstitutionRule rule_;
  Seed seed_;
  Coordinates coords_;
  mutable std::vector<Level> levels_;
};

class DeloneSegment {
 public:
  const SubstitutionRule& rule() const { return rule_; }
  const Seed& seed() const { return seed_; }
  double window() const { return window_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t origin() const { return origin_; }
  const Word& labels() const { return labels_; }
  Letter label(std::size_t i) const { return static_cast<Letter>(labels_[i]); }
  const Coordinates& coordinates() const { return coords_; }
  double coordinate(std::size_t i) const;
  // Exact coordinate in ticks (exact mode only).
  std::int64_t tick(std::size_t i) const { return ticks_[i]; }
  std::optional<Rational> exact_coordinate(std::size_t i) const;

  struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
  };
  // Points with a <= x <= b.
  Range closed(double a, double b) const;
  // Points with a <= x < b.
  Range half_open(double a, double b) const;
  // Points in [-T, T]; throws if the segment does not cover the window.
  Range window_range(double T) const;

  std::vector<long> counts(Range r) const;

 private:
  friend DeloneSegment build_segment(const SubstitutionRule&, const Seed&, double, std::size_t);
  DeloneSegment(const SubstitutionRule& rule, const Seed& seed, double window);
  std::size_t lower_bound(double x, bool inclusive) const;

  SubstitutionRule rule_;
  Seed seed_;
  double window_ = 0.0;
  Coordinates coords_;
  Word labels_;
  std::size_t origin_ = 0;
  std::vector<std::int64_t> ticks_;
  std::vector<double> approx_;
  double covered_lo_ = 0.0;  // the segment holds every point of Lambda in [covered_lo_, covered_hi_]
  double covered_hi_ = 0.0;
};

// All points of Lambda in [-T, T] plus `margin` further points on each side
// (context for kernels near the window edge).
DeloneSegment build_segment(const SubstitutionRule& rule, const Seed& seed, double T, std::size_t margin = 0);

// Points within distance R of point i, translated so that point i sits at 0.
struct PatternKey {
  std::vector<double> offsets;
  Word labels;
  friend bool operator==(const PatternKey&, const PatternKey&) = default;
  std::string render(const SubstitutionRule& rule) const;
};
PatternKey local_pattern(const DeloneSegment& segment, std::size_t i, double R);

// Number of points within distance r of {-T, T}.
std::size_t boundary_collar_count(const DeloneSegment& segment, double T, double r);

// CSV with columns index,coordinate,label for points in [-T, T]; index 0 is
// the origin.
void write_segment_csv(const DeloneSegment& segment, double T, std::ostream& out);

}  // namespace tracelab

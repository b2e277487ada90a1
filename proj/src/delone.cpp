#include "tracelab/delone.hpp"
#include "tracelab/simd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace tracelab {

double WindowFamily::phase_offset(int k) const {
  return std::pow(expansion, static_cast<double>(k) / static_cast<double>(phases));
}

std::vector<WindowSample> WindowFamily::samples() const {
  std::vector<WindowSample> out;
  for (int n = n_min; n <= n_max; ++n)
    for (int k = 0; k < phases; ++k) out.push_back({n, k, std::pow(expansion, n) * phase_offset(k)});
  return out;
}

WindowFamily geometric_schedule(double expansion, int n_min, int n_max, int phases) {
  if (!(expansion > 1.0)) throw std::invalid_argument("schedule needs an expansion > 1");
  if (n_max < n_min || phases < 1) throw std::invalid_argument("empty schedule");
  WindowFamily w;
  w.expansion = expansion;
  w.n_min = n_min;
  w.n_max = n_max;
  w.phases = phases;
  return w;
}

Coordinates::Coordinates(const RealVector& lengths) {
  for (double x : lengths.approx) lengths_.push_back(static_cast<long double>(x));
  if (!lengths.exact) return;
  mpz_class lcm = 1;
  for (const auto& q : *lengths.exact) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), q.get_den_mpz_t());
  for (const auto& q : *lengths.exact) {
    mpz_class t = q.get_num() * (lcm / q.get_den());
    if (!t.fits_slong_p()) return;
    ticks_.push_back(t.get_si());
  }
  unit_ = Rational(mpz_class(1), lcm);
  exact_ = true;
  for (std::size_t i = 0; i < ticks_.size(); ++i) lengths_[i] = static_cast<long double>(ticks_[i]);
}

namespace {

std::int64_t to_ticks(double x, const Rational& unit, bool ceil) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite coordinate");
  Rational q = Rational(x) / unit;
  mpz_class r;
  if (ceil)
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  else
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (!r.fits_slong_p()) throw std::overflow_error("coordinate out of range");
  return r.get_si();
}

}  // namespace

std::int64_t Coordinates::floor_ticks(double x) const { return to_ticks(x, unit_, false); }
std::int64_t Coordinates::ceil_ticks(double x) const { return to_ticks(x, unit_, true); }

SupertileCounter::SupertileCounter(const SubstitutionRule& rule, const Seed& seed)
    : rule_(rule), seed_(seed), coords_(rule.lengths()) {
  Level base;
  const std::size_t m = rule_.size();
  for (std::size_t a = 0; a < m; ++a) {
    base.ticks.push_back(coords_.exact() ? coords_.ticks()[a] : 0);
    base.length.push_back(coords_.lengths()[a]);
    std::vector<long> e(m, 0);
    e[a] = 1;
    base.counts.push_back(std::move(e));
  }
  levels_.push_back(std::move(base));
}

void SupertileCounter::grow_to(double x) const {
  const std::size_t m = rule_.size();
  auto anchor_length = [&](Letter a) { return levels_.back().length[a]; };
  while (levels_.size() % seed_.power != 1 % seed_.power || anchor_length(seed_.right_anchor) <= x ||
         anchor_length(seed_.left_anchor) <= x) {
    const Level& prev = levels_.back();
    Level next;
    for (std::size_t a = 0; a < m; ++a) {
      std::int64_t t = 0;
      long double len = 0;
      std::vector<long> c(m, 0);
      for (char ch : rule_.image(static_cast<Letter>(a))) {
        const auto b = static_cast<Letter>(ch);
        if (__builtin_add_overflow(t, prev.ticks[b], &t)) throw std::overflow_error("supertile too long");
        len += prev.length[b];
        for (std::size_t l = 0; l < m; ++l) c[l] += prev.counts[b][l];
      }
      next.ticks.push_back(t);
      next.length.push_back(len);
      next.counts.push_back(std::move(c));
    }
    if (levels_.size() > 200) throw std::overflow_error("supertile hierarchy too deep");
    levels_.push_back(std::move(next));
  }
}

template <bool Right>
void SupertileCounter::walk(Letter a, std::size_t depth, std::int64_t budget_ticks, long double budget,
                            std::vector<long>& out) const {
  const bool exact = coords_.exact();
  auto covers = [&](std::size_t d, Letter b) {
    return exact ? budget_ticks >= levels_[d].ticks[b] : budget >= levels_[d].length[b];
  };
  auto consume = [&](std::size_t d, Letter b) {
    budget_ticks -= levels_[d].ticks[b];
    budget -= levels_[d].length[b];
  };
  if (depth == 0) {
    // Right side: offset 0 must be within budget. Left side: the point sits
    // one tile length away from the supertile's right end.
    const bool in = Right ? (exact ? budget_ticks >= 0 : budget >= 0) : covers(0, a);
    if (in) out[a] += 1;
    return;
  }
  const Word& img = rule_.image(a);
  const std::size_t n = img.size();
  for (std::size_t s = 0; s < n; ++s) {
    const auto b = static_cast<Letter>(Right ? img[s] : img[n - 1 - s]);
    if (Right && (exact ? budget_ticks < 0 : budget < 0)) return;
    if (covers(depth - 1, b)) {
      const auto& c = levels_[depth - 1].counts[b];
      for (std::size_t l = 0; l < out.size(); ++l) out[l] += c[l];
      consume(depth - 1, b);
      continue;
    }
    walk<Right>(b, depth - 1, budget_ticks, budget, out);
    return;
  }
}

std::vector<long> SupertileCounter::side_counts(double x, bool right) const {
  std::vector<long> out(rule_.size(), 0);
  if (x < 0) return out;
  grow_to(x);
  const std::size_t depth = levels_.size() - 1;
  const std::int64_t t = coords_.exact() ? coords_.floor_ticks(x) : 0;
  const long double len = static_cast<long double>(x);
  if (right)
    walk<true>(seed_.right_anchor, depth, t, len, out);
  else
    walk<false>(seed_.left_anchor, depth, t, len, out);
  return out;
}

std::vector<long> SupertileCounter::right_counts(double x) const { return side_counts(x, true); }
std::vector<long> SupertileCounter::left_counts(double x) const { return side_counts(x, false); }

std::vector<long> SupertileCounter::counts(double T) const {
  auto r = right_counts(T);
  auto l = left_counts(T);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += l[i];
  return r;
}

DeloneSegment::DeloneSegment(const SubstitutionRule& rule, const Seed& seed, double window)
    : rule_(rule), seed_(seed), window_(window), coords_(rule.lengths()) {}

double DeloneSegment::coordinate(std::size_t i) const {
  if (coords_.exact()) return to_double(Rational(ticks_[i]) * coords_.unit());
  return approx_[i];
}

std::optional<Rational> DeloneSegment::exact_coordinate(std::size_t i) const {
  if (!coords_.exact()) return std::nullopt;
  return Rational(ticks_[i]) * coords_.unit();
}

std::size_t DeloneSegment::lower_bound(double x, bool inclusive) const {
  if (coords_.exact()) {
    if (inclusive) {
      const std::int64_t t = coords_.ceil_ticks(x);
      return static_cast<std::size_t>(std::lower_bound(ticks_.begin(), ticks_.end(), t) - ticks_.begin());
    }
    const std::int64_t t = coords_.floor_ticks(x);
    return static_cast<std::size_t>(std::upper_bound(ticks_.begin(), ticks_.end(), t) - ticks_.begin());
  }
  if (inclusive)
    return static_cast<std::size_t>(std::lower_bound(approx_.begin(), approx_.end(), x) - approx_.begin());
  return static_cast<std::size_t>(std::upper_bound(approx_.begin(), approx_.end(), x) - approx_.begin());
}

DeloneSegment::Range DeloneSegment::closed(double a, double b) const {
  if (a < covered_lo_ || b > covered_hi_) throw std::out_of_range("interval exceeds the segment");
  Range r{lower_bound(a, true), lower_bound(b, false)};
  if (r.end < r.begin) r.end = r.begin;
  return r;
}

DeloneSegment::Range DeloneSegment::half_open(double a, double b) const {
  if (a < covered_lo_ || b > covered_hi_) throw std::out_of_range("interval exceeds the segment");
  Range r{lower_bound(a, true), lower_bound(b, true)};
  if (r.end < r.begin) r.end = r.begin;
  return r;
}

DeloneSegment::Range DeloneSegment::window_range(double T) const {
  if (T < 0) throw std::invalid_argument("negative window");
  return closed(-T, T);
}

std::vector<long> DeloneSegment::counts(Range r) const {
  std::vector<std::uint64_t> c(rule_.size(), 0);
  simd::active().histogram_u8(reinterpret_cast<const std::uint8_t*>(labels_.data()) + r.begin, r.size(), c.data(),
                              static_cast<unsigned>(rule_.size()));
  return std::vector<long>(c.begin(), c.end());
}

DeloneSegment build_segment(const SubstitutionRule& rule, const Seed& seed, double T, std::size_t margin) {
  if (!(T >= 0)) throw std::invalid_argument("window must be nonnegative");
  SupertileCounter counter(rule, seed);
  auto sum = [](const std::vector<long>& v) {
    long s = 0;
    for (long x : v) s += x;
    return static_cast<std::size_t>(s);
  };
  const std::size_t n_right = sum(counter.right_counts(T)) + margin;
  const std::size_t n_left = sum(counter.left_counts(T)) + margin;

  DeloneSegment seg(rule, seed, T);
  Word right = limit_right(rule, seed, n_right);
  Word left = limit_left(rule, seed, n_left);
  seg.origin_ = left.size();
  seg.labels_ = left + right;
  const std::size_t n = seg.labels_.size();
  const std::size_t m = rule.size();
  const auto& lengths = seg.coords_.lengths();

  if (seg.coords_.exact()) {
    const auto& ticks = seg.coords_.ticks();
    seg.ticks_.assign(n, 0);
    std::int64_t x = 0;
    for (std::size_t i = seg.origin_; i < n; ++i) {
      seg.ticks_[i] = x;
      x += ticks[seg.label(i)];
    }
    x = 0;
    for (std::size_t i = seg.origin_; i-- > 0;) {
      x -= ticks[seg.label(i)];
      seg.ticks_[i] = x;
    }
  } else {
    // Coordinates from exact letter counts, one rounding per point.
    seg.approx_.assign(n, 0.0);
    std::vector<long> c(m, 0);
    auto position = [&] {
      long double s = 0;
      for (std::size_t l = 0; l < m; ++l) s += static_cast<long double>(c[l]) * lengths[l];
      return s;
    };
    for (std::size_t i = seg.origin_; i < n; ++i) {
      seg.approx_[i] = static_cast<double>(position());
      ++c[seg.label(i)];
    }
    std::fill(c.begin(), c.end(), 0);
    for (std::size_t i = seg.origin_; i-- > 0;) {
      ++c[seg.label(i)];
      seg.approx_[i] = -static_cast<double>(position());
    }
  }
  seg.covered_lo_ = std::min(-T, n ? seg.coordinate(0) : 0.0);
  seg.covered_hi_ = std::max(T, n ? seg.coordinate(n - 1) : 0.0);
  return seg;
}

std::string PatternKey::render(const SubstitutionRule& rule) const {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.12g:", i ? " " : "", offsets[i]);
    out += buf;
    out += rule.glyph(static_cast<Letter>(labels[i]));
  }
  return out;
}

PatternKey local_pattern(const DeloneSegment& segment, std::size_t i, double R) {
  if (i >= segment.size()) throw std::out_of_range("point index out of range");
  if (R < 0) throw std::invalid_argument("negative radius");
  const double x = segment.coordinate(i);
  DeloneSegment::Range r;
  try {
    r = segment.closed(x - R, x + R);
  } catch (const std::out_of_range&) {
    throw std::out_of_range("insufficient margin for a pattern of radius " + std::to_string(R));
  }
  PatternKey key;
  for (std::size_t j = r.begin; j < r.end; ++j) {
    if (segment.coordinates().exact())
      key.offsets.push_back(to_double(Rational(segment.tick(j) - segment.tick(i)) * segment.coordinates().unit()));
    else
      key.offsets.push_back(segment.coordinate(j) - x);
    key.labels.push_back(static_cast<char>(segment.label(j)));
  }
  return key;
}

std::size_t boundary_collar_count(const DeloneSegment& segment, double T, double r) {
  if (r < 0 || T < 0) throw std::invalid_argument("negative radius or window");
  if (T <= r) return segment.closed(-T - r, T + r).size();
  return segment.closed(-T - r, -T + r).size() + segment.closed(T - r, T + r).size();
}

void write_segment_csv(const DeloneSegment& segment, double T, std::ostream& out) {
  out << "index,coordinate,label\n";
  auto r = segment.window_range(T);
  char buf[64];
  for (std::size_t i = r.begin; i < r.end; ++i) {
    const long index = static_cast<long>(i) - static_cast<long>(segment.origin());
    std::snprintf(buf, sizeof buf, "%ld,%.12g,", index, segment.coordinate(i));
    out << buf << segment.rule().glyph(segment.label(i)) << '\n';
  }
}

}  // namespace tracelab

#include "mec/interval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "mec/error.hpp"

namespace mec {

double round_down(double v) { return std::nextafter(v, -std::numeric_limits<double>::infinity()); }
double round_up(double v) { return std::nextafter(v, std::numeric_limits<double>::infinity()); }

namespace {

Interval widen(double lo, double hi, int ulps) {
  for (int i = 0; i < ulps; ++i) {
    lo = round_down(lo);
    hi = round_up(hi);
  }
  return {lo, hi};
}

// True when some x = offset + 2 pi k may lie in [a.lo, a.hi]; errs towards true.
bool may_contain_phase(const Interval& a, double offset) {
  const double slack = 1e-12 * (1.0 + std::max(std::abs(a.lo), std::abs(a.hi)));
  const double k = std::ceil((a.lo - slack - offset) / (2.0 * std::numbers::pi));
  return offset + 2.0 * std::numbers::pi * k <= a.hi + slack;
}

}  // namespace

Interval::Interval(double l, double h) : lo(l), hi(h) {
  if (!(l <= h)) throw Error(ErrorCode::InvalidParams, "interval with lo > hi");
}

Interval operator+(const Interval& a, const Interval& b) { return widen(a.lo + b.lo, a.hi + b.hi, 1); }
Interval operator-(const Interval& a, const Interval& b) { return widen(a.lo - b.hi, a.hi - b.lo, 1); }
Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

Interval operator*(const Interval& a, const Interval& b) {
  const double c[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return widen(*std::min_element(c, c + 4), *std::max_element(c, c + 4), 1);
}

Interval sqr(const Interval& a) {
  const Interval m = abs(a);
  return widen(m.lo * m.lo, m.hi * m.hi, 1);
}

Interval sqrt(const Interval& a) {
  if (a.hi < 0.0) throw Error(ErrorCode::InvalidParams, "sqrt of a negative interval");
  Interval r = widen(std::sqrt(std::max(0.0, a.lo)), std::sqrt(a.hi), 2);
  r.lo = std::max(r.lo, 0.0);
  return r;
}

Interval sin(const Interval& a) {
  if (a.hi - a.lo >= 2.0 * std::numbers::pi) return {-1.0, 1.0};
  const double s1 = std::sin(a.lo);
  const double s2 = std::sin(a.hi);
  Interval r = widen(std::min(s1, s2), std::max(s1, s2), 2);
  if (may_contain_phase(a, 0.5 * std::numbers::pi)) r.hi = 1.0;
  if (may_contain_phase(a, -0.5 * std::numbers::pi)) r.lo = -1.0;
  r.lo = std::max(r.lo, -1.0);
  r.hi = std::min(r.hi, 1.0);
  return r;
}

Interval cos(const Interval& a) {
  if (a.hi - a.lo >= 2.0 * std::numbers::pi) return {-1.0, 1.0};
  const double c1 = std::cos(a.lo);
  const double c2 = std::cos(a.hi);
  Interval r = widen(std::min(c1, c2), std::max(c1, c2), 2);
  if (may_contain_phase(a, 0.0)) r.hi = 1.0;
  if (may_contain_phase(a, std::numbers::pi)) r.lo = -1.0;
  r.lo = std::max(r.lo, -1.0);
  r.hi = std::min(r.hi, 1.0);
  return r;
}

Interval abs(const Interval& a) {
  if (a.lo >= 0.0) return a;
  if (a.hi <= 0.0) return -a;
  return {0.0, std::max(-a.lo, a.hi)};
}

Interval hull(const Interval& a, const Interval& b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

Interval meet(const Interval& a, const Interval& b) {
  if (!a.intersects(b)) throw Error(ErrorCode::InvalidParams, "meet of disjoint intervals");
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

std::string to_string(const Interval& x) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "[%.17g (down), %.17g (up)]", x.lo, x.hi);
  return buf;
}

}  // namespace mec

#pragma once

#include <string>
#include <vector>

namespace mec {

// Closed interval with outward-rounded arithmetic: every operation widens
// its floating-point result by one ulp per endpoint (two for libm calls),
// so the exact result of the real operation is always enclosed.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double v) : lo(v), hi(v) {}  // NOLINT(google-explicit-constructor)
  Interval(double l, double h);

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval sqr(const Interval& a);
Interval sqrt(const Interval& a);
Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval abs(const Interval& a);
Interval hull(const Interval& a, const Interval& b);
// Intersection; requires a.intersects(b).
Interval meet(const Interval& a, const Interval& b);

using IntervalBox = std::vector<Interval>;

double round_down(double v);
double round_up(double v);

// Decimal rendering with explicit rounding direction, e.g. "[1.25 (down), 2.5 (up)]".
std::string to_string(const Interval& x);

}  // namespace mec

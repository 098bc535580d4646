#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mec {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class CoordKind : std::uint8_t { Line, Angle };

struct ExcludedPoint {
  Eigen::VectorXd coords;
  double radius = 0.0;
};

// One component R^a x (S^1)^b of a coordinate model, with finitely many
// removed points. Angle coordinates are stored in [0, 2pi).
class Patch {
 public:
  Patch() = default;
  Patch(int lin_count, int circ_count, std::string label = {});
  Patch(std::vector<CoordKind> kinds, std::string label);

  int dim() const { return static_cast<int>(kinds_.size()); }
  int lin_count() const;
  int circ_count() const;
  CoordKind kind(int i) const { return kinds_[static_cast<std::size_t>(i)]; }
  const std::vector<CoordKind>& kinds() const { return kinds_; }
  const std::string& label() const { return label_; }
  const std::vector<ExcludedPoint>& excluded() const { return excluded_; }

  // Removes the closed ball of `radius` around `coords`.
  Patch& exclude(const Eigen::VectorXd& coords, double radius);

  Eigen::VectorXd normalize(Eigen::VectorXd x) const;
  // a - b with angle components wrapped into [-pi, pi).
  Eigen::VectorXd difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  // Distance to the nearest exclusion ball boundary; +inf without exclusions.
  double exclusion_margin(const Eigen::VectorXd& x) const;
  bool in_exclusion(const Eigen::VectorXd& x) const { return exclusion_margin(x) < 0.0; }

 private:
  std::vector<CoordKind> kinds_;
  std::string label_;
  std::vector<ExcludedPoint> excluded_;
};

double normalize_angle(double theta);

struct Point {
  int patch = 0;
  Eigen::VectorXd coords;
};

struct Tangent {
  Point base;
  Eigen::VectorXd coeffs;
};

// A finite disjoint union of patches.
class Space {
 public:
  Space() = default;
  explicit Space(std::vector<Patch> patches);

  static Space point(std::string label = "pt");
  static Space euclidean(int n, std::string label = {});

  int size() const { return static_cast<int>(patches_.size()); }
  const Patch& patch(int i) const { return patches_.at(static_cast<std::size_t>(i)); }
  const std::vector<Patch>& patches() const { return patches_; }
  int dim(int patch_index) const { return patch(patch_index).dim(); }
  int find(std::string_view label) const;

  // True when the point lies in a patch, has the right length and avoids
  // the exclusion balls.
  bool contains(const Point& p) const;
  Point make_point(int patch_index, Eigen::VectorXd coords) const;
  Point normalize(Point p) const;
  Point advance(const Point& p, const Eigen::VectorXd& delta) const;
  Eigen::VectorXd difference(const Point& a, const Point& b) const;
  // Flat-gauge distance; +inf across patches.
  double distance(const Point& a, const Point& b) const;

 private:
  std::vector<Patch> patches_;
};

Patch product(const Patch& a, const Patch& b);
// Patch (i, j) of the product sits at index i * b.size() + j.
Space product(const Space& a, const Space& b);
Space disjoint_union(const Space& a, const Space& b);

Point pack(const Space& a, const Space& b, const Point& p, const Point& q);
std::pair<Point, Point> unpack(const Space& a, const Space& b, const Point& pq);

std::vector<double> to_std(const Eigen::VectorXd& v);
std::vector<double> flatten(const Point& p);

}  // namespace mec

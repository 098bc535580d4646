#include "mec/manifold.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "mec/error.hpp"

namespace mec {

double normalize_angle(double theta) {
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a value just below a multiple of 2pi can round up to 2pi itself
  if (r >= kTwoPi) r = 0.0;
  return r;
}

Patch::Patch(int lin_count, int circ_count, std::string label) : label_(std::move(label)) {
  if (lin_count < 0 || circ_count < 0) throw Error(ErrorCode::InvalidParams, "negative patch dimension");
  kinds_.assign(static_cast<std::size_t>(lin_count), CoordKind::Line);
  kinds_.insert(kinds_.end(), static_cast<std::size_t>(circ_count), CoordKind::Angle);
}

Patch::Patch(std::vector<CoordKind> kinds, std::string label) : kinds_(std::move(kinds)), label_(std::move(label)) {}

int Patch::lin_count() const {
  int n = 0;
  for (auto k : kinds_) n += k == CoordKind::Line ? 1 : 0;
  return n;
}

int Patch::circ_count() const { return dim() - lin_count(); }

Patch& Patch::exclude(const Eigen::VectorXd& coords, double radius) {
  if (coords.size() != dim() || !(radius > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "bad exclusion for patch " + label_);
  }
  excluded_.push_back({normalize(coords), radius});
  return *this;
}

Eigen::VectorXd Patch::normalize(Eigen::VectorXd x) const {
  for (int i = 0; i < dim(); ++i) {
    if (kind(i) == CoordKind::Angle) x[i] = normalize_angle(x[i]);
  }
  return x;
}

Eigen::VectorXd Patch::difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  Eigen::VectorXd d = a - b;
  for (int i = 0; i < dim(); ++i) {
    if (kind(i) == CoordKind::Angle) {
      d[i] = std::remainder(d[i], kTwoPi);
      if (d[i] >= 0.5 * kTwoPi) d[i] -= kTwoPi;
    }
  }
  return d;
}

double Patch::exclusion_margin(const Eigen::VectorXd& x) const {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& e : excluded_) margin = std::min(margin, difference(x, e.coords).norm() - e.radius);
  return margin;
}

Space::Space(std::vector<Patch> patches) : patches_(std::move(patches)) {
  std::set<std::string> labels;
  for (const auto& p : patches_) {
    if (!labels.insert(p.label()).second) {
      throw Error(ErrorCode::InvalidParams, "duplicate patch label '" + p.label() + "'");
    }
  }
}

Space Space::point(std::string label) { return Space({Patch(0, 0, std::move(label))}); }

Space Space::euclidean(int n, std::string label) {
  if (label.empty()) label = "R" + std::to_string(n);
  return Space({Patch(n, 0, std::move(label))});
}

int Space::find(std::string_view label) const {
  for (int i = 0; i < size(); ++i) {
    if (patch(i).label() == label) return i;
  }
  return -1;
}

bool Space::contains(const Point& p) const {
  if (p.patch < 0 || p.patch >= size()) return false;
  const Patch& pa = patch(p.patch);
  if (p.coords.size() != pa.dim() || !p.coords.allFinite()) return false;
  return !pa.in_exclusion(p.coords);
}

Point Space::make_point(int patch_index, Eigen::VectorXd coords) const {
  if (patch_index < 0 || patch_index >= size() || coords.size() != dim(patch_index)) {
    throw Error(ErrorCode::InvalidParams, "point does not match the space layout");
  }
  return {patch_index, patch(patch_index).normalize(std::move(coords))};
}

Point Space::normalize(Point p) const {
  p.coords = patch(p.patch).normalize(std::move(p.coords));
  return p;
}

Point Space::advance(const Point& p, const Eigen::VectorXd& delta) const {
  return {p.patch, patch(p.patch).normalize(p.coords + delta)};
}

Eigen::VectorXd Space::difference(const Point& a, const Point& b) const {
  if (a.patch != b.patch) throw Error(ErrorCode::InvalidParams, "difference across patches");
  return patch(a.patch).difference(a.coords, b.coords);
}

double Space::distance(const Point& a, const Point& b) const {
  if (a.patch != b.patch) return std::numeric_limits<double>::infinity();
  return difference(a, b).norm();
}

Patch product(const Patch& a, const Patch& b) {
  std::vector<CoordKind> kinds = a.kinds();
  kinds.insert(kinds.end(), b.kinds().begin(), b.kinds().end());
  return Patch(std::move(kinds), a.label() + "*" + b.label());
}

Space product(const Space& a, const Space& b) {
  std::vector<Patch> out;
  out.reserve(static_cast<std::size_t>(a.size() * b.size()));
  for (const auto& pa : a.patches()) {
    for (const auto& pb : b.patches()) out.push_back(product(pa, pb));
  }
  return Space(std::move(out));
}

Space disjoint_union(const Space& a, const Space& b) {
  std::vector<Patch> out = a.patches();
  for (Patch p : b.patches()) {
    if (a.find(p.label()) >= 0) {
      Patch renamed(p.kinds(), p.label() + "'");
      for (const auto& e : p.excluded()) renamed.exclude(e.coords, e.radius);
      p = renamed;
    }
    out.push_back(std::move(p));
  }
  return Space(std::move(out));
}

Point pack(const Space& a, const Space& b, const Point& p, const Point& q) {
  Eigen::VectorXd c(p.coords.size() + q.coords.size());
  c << p.coords, q.coords;
  (void)a;
  return {p.patch * b.size() + q.patch, std::move(c)};
}

std::pair<Point, Point> unpack(const Space& a, const Space& b, const Point& pq) {
  const int i = pq.patch / b.size();
  const int j = pq.patch % b.size();
  const int da = a.dim(i);
  const int db = b.dim(j);
  if (pq.coords.size() != da + db) throw Error(ErrorCode::InvalidParams, "product point has wrong length");
  return {Point{i, pq.coords.head(da)}, Point{j, pq.coords.tail(db)}};
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<double> flatten(const Point& p) {
  std::vector<double> out{static_cast<double>(p.patch)};
  out.insert(out.end(), p.coords.data(), p.coords.data() + p.coords.size());
  return out;
}

}  // namespace mec

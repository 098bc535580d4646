#include "mec/catalog.hpp"

#include <cmath>

#include "mec/error.hpp"
#include "mec/random.hpp"

namespace mec::catalog {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum Salt : std::uint64_t {
  kObject = 11,
  kArrow = 12,
  kPair = 13,
  kFiber = 14,
  kPath = 15,
  kRetry = 16,
};

constexpr double kSampleRadius = 2.0;

VectorXd random_coords(const Patch& patch, Rng& rng, double radius = kSampleRadius) {
  VectorXd v(patch.dim());
  for (int i = 0; i < patch.dim(); ++i) {
    v[i] = patch.kind(i) == CoordKind::Angle ? uniform(rng, 0.0, kTwoPi) : uniform(rng, -radius, radius);
  }
  return v;
}

Point random_point(const Space& s, Rng& rng, int patch = -1) {
  if (patch < 0) patch = uniform_int(rng, 0, s.size() - 1);
  return s.make_point(patch, random_coords(s.patch(patch), rng));
}

// t -> start + t v + sin(2 pi t) w.
BasePath wiggle(const Space& space, const Point& start, Rng& rng, double scale = 1.0) {
  const int d = space.dim(start.patch);
  const VectorXd v = normal_vector(rng, d, scale);
  const VectorXd w = normal_vector(rng, d, scale / 3.0);
  BasePath p;
  p.space = space;
  p.at = [space, start, v, w](double t) { return space.advance(start, t * v + std::sin(kTwoPi * t) * w); };
  p.velocity = [v, w](double t) -> VectorXd { return v + kTwoPi * std::cos(kTwoPi * t) * w; };
  return p;
}

// Curve in a product chart assembled from component curves.
BasePath joined(const Space& space, std::vector<BasePath> parts, std::function<int(const std::vector<Point>&)> patch_of) {
  BasePath p;
  p.space = space;
  p.at = [parts, patch_of, space](double t) {
    std::vector<Point> pts;
    Eigen::Index n = 0;
    for (const auto& q : parts) {
      pts.push_back(q.at(t));
      n += pts.back().coords.size();
    }
    VectorXd c(n);
    Eigen::Index off = 0;
    for (const auto& q : pts) {
      c.segment(off, q.coords.size()) = q.coords;
      off += q.coords.size();
    }
    return Point{patch_of(pts), c};
  };
  p.velocity = [parts](double t) -> VectorXd {
    std::vector<VectorXd> vs;
    Eigen::Index n = 0;
    for (const auto& q : parts) {
      vs.push_back(q.velocity(t));
      n += vs.back().size();
    }
    VectorXd c(n);
    Eigen::Index off = 0;
    for (const auto& v : vs) {
      c.segment(off, v.size()) = v;
      off += v.size();
    }
    return c;
  };
  return p;
}

Point retry_admissible(const std::function<Point(Rng&)>& draw, const std::function<bool(const Point&)>& ok,
                       std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    Rng rng = make_rng(seed, index, salt + (attempt << 8));
    Point p = draw(rng);
    if (ok(p)) return p;
  }
  throw Error(ErrorCode::SamplerFailure, "no admissible sample after 64 draws");
}

const Patch& single_patch(const Space& s, const char* what) {
  if (s.size() != 1) throw Error(ErrorCode::InvalidParams, std::string(what) + " needs a single-patch space");
  return s.patch(0);
}

std::string label_of(const Space& s) {
  std::string out;
  for (const auto& p : s.patches()) out += (out.empty() ? "" : "+") + p.label();
  return out;
}

MatrixXd block_diag(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd m = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

VectorXd concat(const VectorXd& a, const VectorXd& b) {
  VectorXd c(a.size() + b.size());
  c << a, b;
  return c;
}

Eigen::Matrix2d rotation(double th) {
  Eigen::Matrix2d r;
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

Eigen::Matrix2d rotation_prime(double th) {
  Eigen::Matrix2d r;
  r << -std::sin(th), -std::cos(th), std::cos(th), -std::sin(th);
  return r;
}

}  // namespace

Space real_line(const std::string& label) { return Space::euclidean(1, label); }
Space circle(const std::string& label) { return Space({Patch(0, 1, label)}); }

// ---------------------------------------------------------------------------

GroupoidPtr unit_groupoid(const Space& N) {
  auto G = std::make_shared<Groupoid>();
  G->name = "unit(" + label_of(N) + ")";
  G->objects = N;
  G->arrows = N;
  G->src = G->tgt = G->unit = G->inv = identity_map(N);
  G->mul = make_map(
      product(N, N), N, [N](const Point& p) { return unpack(N, N, p).second; },
      [N](const Point& p) -> MatrixXd {
        const auto d = unpack(N, N, p).second.coords.size();
        MatrixXd m = MatrixXd::Zero(d, 2 * d);
        m.rightCols(d).setIdentity();
        return m;
      });
  auto ok = [N](const Point& x) { return N.contains(x); };
  G->sample_object = [N, ok](std::uint64_t seed, std::uint64_t i) {
    return retry_admissible([&](Rng& r) { return random_point(N, r); }, ok, seed, i, kObject);
  };
  G->sample_arrow = G->sample_object;
  G->sample_pair = [f = G->sample_object](std::uint64_t seed, std::uint64_t i) {
    const Point x = f(seed, i);
    return std::make_pair(x, x);
  };
  G->sample_sfiber = [](const Point& x, std::uint64_t, std::uint64_t) { return x; };
  G->object_path = [N](const Point& x, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    return wiggle(N, x, r);
  };
  G->arrow_path = G->object_path;
  G->pair_paths = [f = G->object_path](const Point& g, const Point&, std::uint64_t seed, std::uint64_t i) {
    const BasePath p = f(g, seed, i);
    return std::make_pair(p, p);
  };
  G->haar = [](const Point& x, int) { return std::vector<HaarNode>{{x, 1.0}}; };
  G->traits = {true, true, true, true};
  return G;
}

GroupoidPtr pair(const Space& M) {
  const Patch& pm = single_patch(M, "pair groupoid");
  auto G = std::make_shared<Groupoid>();
  const int d = pm.dim();
  G->name = "pair(" + pm.label() + ")";
  G->objects = M;
  G->arrows = Space({Patch(product(pm, pm).kinds(), pm.label() + "^2")});
  const Space A = G->arrows;
  G->arrow_guard = [M, d](const Point& g) {
    return M.contains({0, g.coords.head(d)}) && M.contains({0, g.coords.tail(d)});
  };
  MatrixXd first(d, 2 * d);
  first << MatrixXd::Identity(d, d), MatrixXd::Zero(d, d);
  MatrixXd second(d, 2 * d);
  second << MatrixXd::Zero(d, d), MatrixXd::Identity(d, d);
  G->tgt = make_map(A, M, [d](const Point& g) { return Point{0, g.coords.head(d)}; },
                    [first](const Point&) -> MatrixXd { return first; });
  G->src = make_map(A, M, [d](const Point& g) { return Point{0, g.coords.tail(d)}; },
                    [second](const Point&) -> MatrixXd { return second; });
  G->unit = make_map(M, A, [](const Point& x) { return Point{0, concat(x.coords, x.coords)}; },
                     [d](const Point&) -> MatrixXd {
                       MatrixXd m(2 * d, d);
                       m << MatrixXd::Identity(d, d), MatrixXd::Identity(d, d);
                       return m;
                     });
  G->inv = make_map(A, A, [d](const Point& g) { return Point{0, concat(g.coords.tail(d), g.coords.head(d))}; },
                    [d](const Point&) -> MatrixXd {
                      MatrixXd m = MatrixXd::Zero(2 * d, 2 * d);
                      m.topRightCorner(d, d).setIdentity();
                      m.bottomLeftCorner(d, d).setIdentity();
                      return m;
                    });
  G->mul = make_map(
      product(A, A), A,
      [d](const Point& p) { return Point{0, concat(p.coords.head(d), p.coords.tail(d))}; },
      [d](const Point&) -> MatrixXd {
        MatrixXd m = MatrixXd::Zero(2 * d, 4 * d);
        m.topLeftCorner(d, d).setIdentity();
        m.bottomRightCorner(d, d).setIdentity();
        return m;
      });
  auto obj_ok = [M](const Point& x) { return M.contains(x); };
  auto draw_obj = [M](Rng& r) { return random_point(M, r); };
  G->sample_object = [=](std::uint64_t seed, std::uint64_t i) {
    return retry_admissible(draw_obj, obj_ok, seed, i, kObject);
  };
  auto two = [=](std::uint64_t seed, std::uint64_t i, std::uint64_t salt) {
    const Point a = retry_admissible(draw_obj, obj_ok, seed, i, salt);
    const Point b = retry_admissible(draw_obj, obj_ok, seed, i, salt + 1000);
    return std::make_pair(a, b);
  };
  G->sample_arrow = [=](std::uint64_t seed, std::uint64_t i) {
    const auto [a, b] = two(seed, i, kArrow);
    return Point{0, concat(a.coords, b.coords)};
  };
  G->sample_pair = [=](std::uint64_t seed, std::uint64_t i) {
    const auto [a, b] = two(seed, i, kPair);
    const Point c = retry_admissible(draw_obj, obj_ok, seed, i, kPair + 2000);
    return std::make_pair(Point{0, concat(a.coords, b.coords)}, Point{0, concat(b.coords, c.coords)});
  };
  G->sample_sfiber = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    const Point a = retry_admissible(draw_obj, obj_ok, seed, i, kFiber);
    return Point{0, concat(a.coords, x.coords)};
  };
  G->object_path = [M](const Point& x, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    return wiggle(M, x, r);
  };
  auto pair_of = [A](const BasePath& a, const BasePath& b) {
    return joined(A, {a, b}, [](const std::vector<Point>&) { return 0; });
  };
  G->arrow_path = [=](const Point& g, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    return pair_of(wiggle(M, Point{0, g.coords.head(d)}, r), wiggle(M, Point{0, g.coords.tail(d)}, r));
  };
  G->pair_paths = [=](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    const BasePath a = wiggle(M, Point{0, g.coords.head(d)}, r);
    const BasePath b = wiggle(M, Point{0, h.coords.head(d)}, r);
    const BasePath c = wiggle(M, Point{0, h.coords.tail(d)}, r);
    return std::make_pair(pair_of(a, b), pair_of(b, c));
  };
  const bool compact = pm.lin_count() == 0;
  G->traits = {true, compact, true, false};
  return G;
}

GroupoidPtr group_bundle(const Space& N, GroupSpec gamma, std::optional<Puncture> puncture) {
  const Patch& pn = single_patch(N, "group bundle");
  const int dn = pn.dim();
  auto G = std::make_shared<Groupoid>();
  G->objects = N;

  if (gamma.kind == GroupKind::Finite) {
    const int n = gamma.size;
    if (n < 1) throw Error(ErrorCode::InvalidParams, "finite group order must be positive");
    G->name = "bundle(" + pn.label() + ",Z" + std::to_string(n) + ")";
    std::vector<Patch> patches;
    for (int k = 0; k < n; ++k) {
      Patch p(pn.kinds(), pn.label() + "|g" + std::to_string(k));
      for (const auto& e : pn.excluded()) p.exclude(e.coords, e.radius);
      if (puncture && k != 0) p.exclude(puncture->coords, puncture->radius);
      patches.push_back(std::move(p));
    }
    if (puncture) G->name = "punctured_" + G->name;
    G->arrows = Space(std::move(patches));
    const Space A = G->arrows;
    auto id = [dn](const Point&) -> MatrixXd { return MatrixXd::Identity(dn, dn); };
    G->src = make_map(A, N, [](const Point& g) { return Point{0, g.coords}; }, id);
    G->tgt = G->src;
    G->unit = make_map(N, A, [](const Point& x) { return Point{0, x.coords}; }, id);
    G->inv = make_map(A, A, [n](const Point& g) { return Point{(n - g.patch) % n, g.coords}; }, id);
    G->mul = make_map(
        product(A, A), A,
        [A, n](const Point& p) {
          const auto [g, h] = unpack(A, A, p);
          return Point{(g.patch + h.patch) % n, h.coords};
        },
        [dn](const Point&) -> MatrixXd {
          MatrixXd m = MatrixXd::Zero(dn, 2 * dn);
          m.rightCols(dn).setIdentity();
          return m;
        });
    // Element k at x, falling back to the identity where it has been removed.
    auto element = [A](const Point& x, int k) {
      Point g{k, x.coords};
      return A.contains(g) ? g : Point{0, x.coords};
    };
    auto draw_obj = [N](Rng& r) { return random_point(N, r); };
    auto obj_ok = [N](const Point& x) { return N.contains(x); };
    G->sample_object = [=](std::uint64_t seed, std::uint64_t i) {
      return retry_admissible(draw_obj, obj_ok, seed, i, kObject);
    };
    G->sample_arrow = [=](std::uint64_t seed, std::uint64_t i) {
      const Point x = retry_admissible(draw_obj, obj_ok, seed, i, kArrow);
      Rng r = make_rng(seed, i, kArrow + 1000);
      return element(x, uniform_int(r, 0, n - 1));
    };
    G->sample_pair = [=](std::uint64_t seed, std::uint64_t i) {
      const Point x = retry_admissible(draw_obj, obj_ok, seed, i, kPair);
      Rng r = make_rng(seed, i, kPair + 1000);
      const int a = uniform_int(r, 0, n - 1);
      const int b = uniform_int(r, 0, n - 1);
      return std::make_pair(element(x, a), element(x, b));
    };
    G->sample_sfiber = [=](const Point& x, std::uint64_t, std::uint64_t i) {
      return element(x, static_cast<int>(i % static_cast<std::uint64_t>(n)));
    };
    G->haar = [=](const Point& x, int) {
      std::vector<HaarNode> nodes;
      for (int k = 0; k < n; ++k) {
        if (A.contains({k, x.coords})) nodes.push_back({Point{k, x.coords}, 0.0});
      }
      for (auto& node : nodes) node.weight = 1.0 / static_cast<double>(nodes.size());
      return nodes;
    };
    G->object_path = [N](const Point& x, std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kPath);
      return wiggle(N, x, r);
    };
    auto lifted = [A](const BasePath& base, int k) {
      BasePath p = base;
      p.space = A;
      p.at = [f = base.at, k](double t) {
        Point q = f(t);
        q.patch = k;
        return q;
      };
      return p;
    };
    G->arrow_path = [=](const Point& g, std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kPath);
      return lifted(wiggle(N, Point{0, g.coords}, r), g.patch);
    };
    G->pair_paths = [=](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kPath);
      const BasePath x = wiggle(N, Point{0, h.coords}, r);
      return std::make_pair(lifted(x, g.patch), lifted(x, h.patch));
    };
    if (puncture) G->landmark_objects.push_back(N.make_point(0, puncture->coords));
    G->traits = {!puncture.has_value(), !puncture.has_value(), n == 1, n == 1};
    return G;
  }

  if (puncture) throw Error(ErrorCode::InvalidParams, "punctures are only supported for finite groups");
  const bool circle_group = gamma.kind == GroupKind::Circle;
  const int k = circle_group ? 1 : gamma.size;
  const Patch fibre = circle_group ? Patch(0, 1, "S1") : Patch(k, 0, "R" + std::to_string(k));
  G->name = "bundle(" + pn.label() + "," + fibre.label() + ")";
  G->arrows = Space({product(pn, fibre)});
  const Space A = G->arrows;
  MatrixXd proj(dn, dn + k);
  proj << MatrixXd::Identity(dn, dn), MatrixXd::Zero(dn, k);
  G->src = make_map(A, N, [dn](const Point& g) { return Point{0, g.coords.head(dn)}; },
                    [proj](const Point&) -> MatrixXd { return proj; });
  G->tgt = G->src;
  G->unit = make_map(N, A, [k](const Point& x) { return Point{0, concat(x.coords, VectorXd::Zero(k))}; },
                     [proj](const Point&) -> MatrixXd { return proj.transpose(); });
  G->inv = make_map(
      A, A,
      [A, dn, k](const Point& g) {
        return A.make_point(0, concat(g.coords.head(dn), -g.coords.tail(k)));
      },
      [dn, k](const Point&) -> MatrixXd { return block_diag(MatrixXd::Identity(dn, dn), -MatrixXd::Identity(k, k)); });
  G->mul = make_map(
      product(A, A), A,
      [A, dn, k](const Point& p) {
        const VectorXd& c = p.coords;
        return A.make_point(0, concat(c.segment(dn + k, dn), c.segment(dn, k) + c.tail(k)));
      },
      [dn, k](const Point&) -> MatrixXd {
        MatrixXd m = MatrixXd::Zero(dn + k, 2 * (dn + k));
        m.block(0, dn + k, dn, dn).setIdentity();
        m.block(dn, dn, k, k).setIdentity();
        m.block(dn, 2 * dn + k, k, k).setIdentity();
        return m;
      });
  G->sample_object = [N](std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kObject);
    return random_point(N, r);
  };
  G->sample_arrow = [A](std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kArrow);
    return random_point(A, r);
  };
  G->sample_pair = [A, fibre, dn](std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPair);
    const Point g = random_point(A, r);
    const VectorXd b = random_coords(fibre, r);
    return std::make_pair(g, A.make_point(0, concat(g.coords.head(dn), b)));
  };
  G->sample_sfiber = [A, fibre](const Point& x, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kFiber);
    return A.make_point(0, concat(x.coords, random_coords(fibre, r)));
  };
  if (circle_group) {
    G->haar = [A](const Point& x, int nodes) {
      std::vector<HaarNode> out;
      for (int j = 0; j < nodes; ++j) {
        VectorXd c(x.coords.size() + 1);
        c << x.coords, kTwoPi * j / nodes;
        out.push_back({A.make_point(0, c), 1.0 / nodes});
      }
      return out;
    };
  }
  const Space F({fibre});
  G->object_path = [N](const Point& x, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    return wiggle(N, x, r);
  };
  G->arrow_path = [A, N, F, dn](const Point& g, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    return joined(A, {wiggle(N, Point{0, g.coords.head(dn)}, r), wiggle(F, Point{0, g.coords.tail(g.coords.size() - dn)}, r)},
                  [](const std::vector<Point>&) { return 0; });
  };
  G->pair_paths = [A, N, F, dn](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    const BasePath x = wiggle(N, Point{0, h.coords.head(dn)}, r);
    const auto k = g.coords.size() - dn;
    const BasePath a = wiggle(F, Point{0, g.coords.tail(k)}, r);
    const BasePath b = wiggle(F, Point{0, h.coords.tail(k)}, r);
    auto one = [](const std::vector<Point>&) { return 0; };
    return std::make_pair(joined(A, {x, a}, one), joined(A, {x, b}, one));
  };
  G->traits = {circle_group, circle_group, true, false};
  return G;
}

GroupoidPtr action(int order, bool trivial) {
  if (order < 0) throw Error(ErrorCode::InvalidParams, "negative group order");
  const Space R2 = Space::euclidean(2, "R2");
  auto G = std::make_shared<Groupoid>();
  G->objects = R2;
  G->landmark_objects.push_back(R2.make_point(0, Eigen::Vector2d(1.0, 0.0)));
  const std::string kind = trivial ? "trivial" : "rotation";

  if (order == 0) {
    G->name = "SO2_" + kind + "_action";
    G->arrows = Space({Patch({CoordKind::Angle, CoordKind::Line, CoordKind::Line}, "SO2xR2")});
    const Space A = G->arrows;
    auto angle = [trivial](const Point& g) { return trivial ? 0.0 : g.coords[0]; };
    G->src = make_map(A, R2, [](const Point& g) { return Point{0, g.coords.tail(2)}; },
                      [](const Point&) -> MatrixXd {
                        MatrixXd m = MatrixXd::Zero(2, 3);
                        m.rightCols(2).setIdentity();
                        return m;
                      });
    G->tgt = make_map(
        A, R2, [angle](const Point& g) { return Point{0, rotation(angle(g)) * g.coords.tail(2)}; },
        [angle, trivial](const Point& g) -> MatrixXd {
          MatrixXd m(2, 3);
          const Eigen::Vector2d p = g.coords.tail(2);
          m.col(0) = trivial ? Eigen::Vector2d::Zero() : Eigen::Vector2d(rotation_prime(angle(g)) * p);
          m.rightCols(2) = rotation(angle(g));
          return m;
        });
    G->unit = make_map(R2, A, [](const Point& x) { return Point{0, concat(VectorXd::Zero(1), x.coords)}; },
                       [](const Point&) -> MatrixXd {
                         MatrixXd m = MatrixXd::Zero(3, 2);
                         m.bottomRows(2).setIdentity();
                         return m;
                       });
    G->inv = make_map(
        A, A,
        [A, angle](const Point& g) {
          VectorXd c(3);
          c << -g.coords[0], rotation(angle(g)) * g.coords.tail(2);
          return A.make_point(0, c);
        },
        [angle, trivial](const Point& g) -> MatrixXd {
          MatrixXd m = MatrixXd::Zero(3, 3);
          m(0, 0) = -1.0;
          const Eigen::Vector2d p = g.coords.tail(2);
          m.block(1, 0, 2, 1) = trivial ? Eigen::Vector2d::Zero() : Eigen::Vector2d(rotation_prime(angle(g)) * p);
          m.block(1, 1, 2, 2) = rotation(angle(g));
          return m;
        });
    G->mul = make_map(
        product(A, A), A,
        [A](const Point& p) {
          VectorXd c(3);
          c << p.coords[0] + p.coords[3], p.coords.tail(2);
          return A.make_point(0, c);
        },
        [](const Point&) -> MatrixXd {
          MatrixXd m = MatrixXd::Zero(3, 6);
          m(0, 0) = 1.0;
          m(0, 3) = 1.0;
          m(1, 4) = 1.0;
          m(2, 5) = 1.0;
          return m;
        });
    G->sample_object = [R2](std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kObject);
      return random_point(R2, r);
    };
    G->sample_arrow = [A](std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kArrow);
      return random_point(A, r);
    };
    const SmoothMap tgt = G->tgt;
    G->sample_pair = [A, tgt](std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kPair);
      const Point h = random_point(A, r);
      const double th = uniform(r, 0.0, kTwoPi);
      return std::make_pair(A.make_point(0, concat(VectorXd::Constant(1, th), tgt(h).coords)), h);
    };
    G->sample_sfiber = [A](const Point& x, std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kFiber);
      return A.make_point(0, concat(VectorXd::Constant(1, uniform(r, 0.0, kTwoPi)), x.coords));
    };
    G->haar = [A, trivial](const Point& q, int nodes) {
      std::vector<HaarNode> out;
      for (int j = 0; j < nodes; ++j) {
        const double phi = kTwoPi * j / nodes;
        const Eigen::Vector2d p = trivial ? Eigen::Vector2d(q.coords) : Eigen::Vector2d(rotation(-phi) * q.coords);
        out.push_back({A.make_point(0, concat(VectorXd::Constant(1, phi), p)), 1.0 / nodes});
      }
      return out;
    };
    G->object_path = [R2](const Point& x, std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kPath);
      return wiggle(R2, x, r);
    };
    G->arrow_path = [A](const Point& g, std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kPath);
      return wiggle(A, g, r);
    };
    G->pair_paths = [A, R2, trivial](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
      Rng r = make_rng(seed, i, kPath);
      const Space S1 = circle();
      const BasePath p = wiggle(R2, Point{0, h.coords.tail(2)}, r);
      const BasePath th2 = wiggle(S1, Point{0, h.coords.head(1)}, r);
      const BasePath th1 = wiggle(S1, Point{0, g.coords.head(1)}, r);
      const BasePath eta = joined(A, {th2, p}, [](const std::vector<Point>&) { return 0; });
      BasePath gamma;
      gamma.space = A;
      gamma.at = [=](double t) {
        const double a = trivial ? 0.0 : th2.at(t).coords[0];
        VectorXd c(3);
        c << th1.at(t).coords, rotation(a) * p.at(t).coords;
        return A.make_point(0, c);
      };
      gamma.velocity = [=](double t) -> VectorXd {
        const double a = trivial ? 0.0 : th2.at(t).coords[0];
        const double da = trivial ? 0.0 : th2.velocity(t)[0];
        VectorXd v(3);
        v << th1.velocity(t), rotation_prime(a) * p.at(t).coords * da + rotation(a) * p.velocity(t);
        return v;
      };
      return std::make_pair(gamma, eta);
    };
    G->traits = {true, true, true, false};
    return G;
  }

  const int n = order;
  G->name = "Z" + std::to_string(n) + "_" + kind + "_action";
  std::vector<Patch> patches;
  for (int k = 0; k < n; ++k) patches.emplace_back(2, 0, "r" + std::to_string(k));
  G->arrows = Space(std::move(patches));
  const Space A = G->arrows;
  auto angle = [n, trivial](int k) { return trivial ? 0.0 : kTwoPi * k / n; };
  auto id = [](const Point&) -> MatrixXd { return MatrixXd::Identity(2, 2); };
  G->src = make_map(A, R2, [](const Point& g) { return Point{0, g.coords}; }, id);
  G->tgt = make_map(A, R2, [angle](const Point& g) { return Point{0, rotation(angle(g.patch)) * g.coords}; },
                    [angle](const Point& g) -> MatrixXd { return rotation(angle(g.patch)); });
  G->unit = make_map(R2, A, [](const Point& x) { return Point{0, x.coords}; }, id);
  G->inv = make_map(A, A,
                    [angle, n](const Point& g) {
                      return Point{(n - g.patch) % n, rotation(angle(g.patch)) * g.coords};
                    },
                    [angle](const Point& g) -> MatrixXd { return rotation(angle(g.patch)); });
  G->mul = make_map(
      product(A, A), A,
      [A, n](const Point& p) {
        const auto [g, h] = unpack(A, A, p);
        return Point{(g.patch + h.patch) % n, h.coords};
      },
      [](const Point&) -> MatrixXd {
        MatrixXd m = MatrixXd::Zero(2, 4);
        m.rightCols(2).setIdentity();
        return m;
      });
  G->sample_object = [R2](std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kObject);
    return random_point(R2, r);
  };
  G->sample_arrow = [A](std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kArrow);
    return random_point(A, r);
  };
  const SmoothMap tgt = G->tgt;
  G->sample_pair = [A, tgt, n](std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPair);
    const Point h = random_point(A, r);
    return std::make_pair(Point{uniform_int(r, 0, n - 1), tgt(h).coords}, h);
  };
  G->sample_sfiber = [n](const Point& x, std::uint64_t, std::uint64_t i) {
    return Point{static_cast<int>(i % static_cast<std::uint64_t>(n)), x.coords};
  };
  G->haar = [angle, n](const Point& q, int) {
    std::vector<HaarNode> out;
    for (int k = 0; k < n; ++k) out.push_back({Point{k, rotation(-angle(k)) * q.coords}, 1.0 / n});
    return out;
  };
  G->object_path = [R2](const Point& x, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    return wiggle(R2, x, r);
  };
  G->arrow_path = [A](const Point& g, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    return wiggle(A, g, r);
  };
  G->pair_paths = [A, R2, angle](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    const BasePath p = wiggle(R2, Point{0, h.coords}, r);
    BasePath eta = p;
    eta.space = A;
    eta.at = [p, k = h.patch](double t) { return Point{k, p.at(t).coords}; };
    BasePath gamma = eta;
    const Eigen::Matrix2d rot = rotation(angle(h.patch));
    gamma.at = [p, k = g.patch, rot](double t) { return Point{k, rot * p.at(t).coords}; };
    gamma.velocity = [p, rot](double t) -> VectorXd { return rot * p.velocity(t); };
    return std::make_pair(gamma, eta);
  };
  G->traits = {true, true, n == 1, false};
  return G;
}

GroupoidPtr trivial_family(const Space& N, const GroupoidPtr& Fp) {
  const Groupoid& F = *Fp;
  const Patch& pn = single_patch(N, "trivial family");
  const int dn = pn.dim();
  auto G = std::make_shared<Groupoid>();
  G->name = "family(" + pn.label() + "," + F.name + ")";
  G->objects = product(N, F.objects);
  G->arrows = product(N, F.arrows);
  const Space A = G->arrows;
  const Space O = G->objects;
  const Space FA = F.arrows;
  const Space FO = F.objects;
  // Points of N x X share the patch index of their X component.
  auto split = [dn](const Point& p) { return std::make_pair(VectorXd(p.coords.head(dn)), Point{p.patch, p.coords.tail(p.coords.size() - dn)}); };
  auto join = [](const VectorXd& n, const Point& x) { return Point{x.patch, concat(n, x.coords)}; };
  auto lift = [=](const SmoothMap& f, const Space& dom, const Space& cod) {
    return make_map(
        dom, cod,
        [=](const Point& p) {
          const auto [n, x] = split(p);
          return join(n, f(x));
        },
        [=](const Point& p) -> MatrixXd {
          const auto [n, x] = split(p);
          return block_diag(MatrixXd::Identity(dn, dn), f.jac(x));
        });
  };
  G->src = lift(F.src, A, O);
  G->tgt = lift(F.tgt, A, O);
  G->unit = lift(F.unit, O, A);
  G->inv = lift(F.inv, A, A);
  const SmoothMap fmul = F.mul;
  G->mul = make_map(
      product(A, A), A,
      [=](const Point& p) {
        const auto [g, h] = unpack(A, A, p);
        const auto [ng, fg] = split(g);
        const auto [nh, fh] = split(h);
        return join(nh, fmul(pack(FA, FA, fg, fh)));
      },
      [=](const Point& p) -> MatrixXd {
        const auto [g, h] = unpack(A, A, p);
        const auto [ng, fg] = split(g);
        const auto [nh, fh] = split(h);
        const auto dg = fg.coords.size();
        const auto dh = fh.coords.size();
        const MatrixXd jf = fmul.jac(pack(FA, FA, fg, fh));
        MatrixXd m = MatrixXd::Zero(dn + jf.rows(), 2 * dn + dg + dh);
        m.block(0, dn + dg, dn, dn).setIdentity();
        m.block(dn, dn, jf.rows(), dg) = jf.leftCols(dg);
        m.block(dn, 2 * dn + dg, jf.rows(), dh) = jf.rightCols(dh);
        return m;
      });
  const DomainGuard fa_guard = F.arrow_guard;
  const DomainGuard fo_guard = F.object_guard;
  const Patch npatch = pn;
  G->arrow_guard = [=](const Point& g) {
    const auto [n, f] = split(g);
    return !npatch.in_exclusion(n) && FA.contains(f) && (!fa_guard || fa_guard(f));
  };
  G->object_guard = [=](const Point& x) {
    const auto [n, f] = split(x);
    return !npatch.in_exclusion(n) && FO.contains(f) && (!fo_guard || fo_guard(f));
  };
  auto draw_n = [N](Rng& r) { return random_point(N, r); };
  auto n_ok = [N](const Point& x) { return N.contains(x); };
  const GroupoidPtr keep = Fp;
  G->sample_object = [=](std::uint64_t seed, std::uint64_t i) {
    return join(retry_admissible(draw_n, n_ok, seed, i, kObject).coords, keep->sample_object(seed, i));
  };
  G->sample_arrow = [=](std::uint64_t seed, std::uint64_t i) {
    return join(retry_admissible(draw_n, n_ok, seed, i, kArrow).coords, keep->sample_arrow(seed, i));
  };
  G->sample_pair = [=](std::uint64_t seed, std::uint64_t i) {
    const VectorXd n = retry_admissible(draw_n, n_ok, seed, i, kPair).coords;
    const auto [a, b] = keep->sample_pair(seed, i);
    return std::make_pair(join(n, a), join(n, b));
  };
  G->sample_sfiber = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    const auto [n, f] = split(x);
    return join(n, keep->sample_sfiber(f, seed, i));
  };
  if (F.haar) {
    G->haar = [=](const Point& x, int nodes) {
      const auto [n, f] = split(x);
      std::vector<HaarNode> out = keep->haar(f, nodes);
      for (auto& node : out) node.arrow = join(n, node.arrow);
      return out;
    };
  }
  auto with_base = [=](const Space& S, const BasePath& nb, const BasePath& fb) {
    return joined(S, {nb, fb}, [](const std::vector<Point>& pts) { return pts[1].patch; });
  };
  G->object_path = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    const auto [n, f] = split(x);
    Rng r = make_rng(seed, i, kPath);
    return with_base(O, wiggle(N, Point{0, n}, r), keep->object_path(f, seed, i));
  };
  G->arrow_path = [=](const Point& g, std::uint64_t seed, std::uint64_t i) {
    const auto [n, f] = split(g);
    Rng r = make_rng(seed, i, kPath);
    return with_base(A, wiggle(N, Point{0, n}, r), keep->arrow_path(f, seed, i));
  };
  G->pair_paths = [=](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
    const auto [ng, fg] = split(g);
    const auto [nh, fh] = split(h);
    Rng r = make_rng(seed, i, kPath);
    const BasePath nb = wiggle(N, Point{0, nh}, r);
    const auto [a, b] = keep->pair_paths(fg, fh, seed, i);
    return std::make_pair(with_base(A, nb, a), with_base(A, nb, b));
  };
  for (const auto& l : F.landmark_objects) {
    G->landmark_objects.push_back(join(VectorXd::Zero(dn), l));
  }
  G->traits = F.traits;
  G->traits.is_unit = F.traits.is_unit;
  return G;
}

GroupoidPtr product_with_manifold(const GroupoidPtr& Hp, const Space& P) {
  const Groupoid& H = *Hp;
  const Patch& pp = single_patch(P, "product with manifold");
  const int dp = pp.dim();
  auto G = std::make_shared<Groupoid>();
  G->name = H.name + "x" + pp.label();
  G->objects = product(H.objects, P);
  G->arrows = product(H.arrows, P);
  const Space A = G->arrows;
  const Space O = G->objects;
  const Space HA = H.arrows;
  auto split = [dp](const Point& p) {
    return std::make_pair(Point{p.patch, p.coords.head(p.coords.size() - dp)}, VectorXd(p.coords.tail(dp)));
  };
  auto join = [](const Point& h, const VectorXd& q) { return Point{h.patch, concat(h.coords, q)}; };
  auto lift = [=](const SmoothMap& f, const Space& dom, const Space& cod) {
    return make_map(
        dom, cod,
        [=](const Point& p) {
          const auto [h, q] = split(p);
          return join(f(h), q);
        },
        [=](const Point& p) -> MatrixXd {
          const auto [h, q] = split(p);
          return block_diag(f.jac(h), MatrixXd::Identity(dp, dp));
        });
  };
  G->src = lift(H.src, A, O);
  G->tgt = lift(H.tgt, A, O);
  G->unit = lift(H.unit, O, A);
  G->inv = lift(H.inv, A, A);
  const SmoothMap hmul = H.mul;
  G->mul = make_map(
      product(A, A), A,
      [=](const Point& p) {
        const auto [g, h] = unpack(A, A, p);
        const auto [hg, qg] = split(g);
        const auto [hh, qh] = split(h);
        return join(hmul(pack(HA, HA, hg, hh)), qh);
      },
      [=](const Point& p) -> MatrixXd {
        const auto [g, h] = unpack(A, A, p);
        const auto [hg, qg] = split(g);
        const auto [hh, qh] = split(h);
        const auto dg = hg.coords.size();
        const auto dh = hh.coords.size();
        const MatrixXd jm = hmul.jac(pack(HA, HA, hg, hh));
        MatrixXd m = MatrixXd::Zero(jm.rows() + dp, 2 * dp + dg + dh);
        m.block(0, 0, jm.rows(), dg) = jm.leftCols(dg);
        m.block(0, dg + dp, jm.rows(), dh) = jm.rightCols(dh);
        m.block(jm.rows(), dg + dp + dh, dp, dp).setIdentity();
        return m;
      });
  const GroupoidPtr keep = Hp;
  auto draw_p = [P](std::uint64_t seed, std::uint64_t i, std::uint64_t salt) {
    Rng r = make_rng(seed, i, salt);
    return random_coords(P.patch(0), r);
  };
  G->arrow_guard = [=](const Point& g) {
    const auto [h, q] = split(g);
    return keep->admits_arrow(h) && !P.patch(0).in_exclusion(q);
  };
  G->object_guard = [=](const Point& x) {
    const auto [h, q] = split(x);
    return keep->admits_object(h) && !P.patch(0).in_exclusion(q);
  };
  G->sample_object = [=](std::uint64_t seed, std::uint64_t i) { return join(keep->sample_object(seed, i), draw_p(seed, i, kObject)); };
  G->sample_arrow = [=](std::uint64_t seed, std::uint64_t i) { return join(keep->sample_arrow(seed, i), draw_p(seed, i, kArrow)); };
  G->sample_pair = [=](std::uint64_t seed, std::uint64_t i) {
    const auto [a, b] = keep->sample_pair(seed, i);
    const VectorXd q = draw_p(seed, i, kPair);
    return std::make_pair(join(a, q), join(b, q));
  };
  G->sample_sfiber = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    const auto [h, q] = split(x);
    return join(keep->sample_sfiber(h, seed, i), q);
  };
  auto with_p = [=](const Space& S, const BasePath& hb, const BasePath& pb) {
    return joined(S, {hb, pb}, [](const std::vector<Point>& pts) { return pts[0].patch; });
  };
  G->object_path = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    const auto [h, q] = split(x);
    Rng r = make_rng(seed, i, kPath);
    return with_p(O, keep->object_path(h, seed, i), wiggle(P, Point{0, q}, r));
  };
  G->arrow_path = [=](const Point& g, std::uint64_t seed, std::uint64_t i) {
    const auto [h, q] = split(g);
    Rng r = make_rng(seed, i, kPath);
    return with_p(A, keep->arrow_path(h, seed, i), wiggle(P, Point{0, q}, r));
  };
  G->pair_paths = [=](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
    const auto [hg, qg] = split(g);
    const auto [hh, qh] = split(h);
    Rng r = make_rng(seed, i, kPath);
    const BasePath pb = wiggle(P, Point{0, qh}, r);
    const auto [a, b] = keep->pair_paths(hg, hh, seed, i);
    return std::make_pair(with_p(A, a, pb), with_p(A, b, pb));
  };
  if (H.haar) {
    G->haar = [=](const Point& x, int nodes) {
      const auto [h, q] = split(x);
      std::vector<HaarNode> out = keep->haar(h, nodes);
      for (auto& node : out) node.arrow = join(node.arrow, q);
      return out;
    };
  }
  G->traits = H.traits;
  G->traits.source_proper = H.traits.source_proper;
  G->traits.is_unit = H.traits.is_unit;
  return G;
}

GroupoidPtr pullback(const GroupoidPtr& Hp, int k, std::optional<Puncture> puncture) {
  const Groupoid& H = *Hp;
  const Patch& pn = single_patch(H.objects, "pullback base");
  if (k < 0) throw Error(ErrorCode::InvalidParams, "negative fibre dimension");
  const int dn = pn.dim();
  const Patch fib(k, 0, "R" + std::to_string(k));
  Patch mpatch = product(pn, fib);
  if (puncture) mpatch.exclude(puncture->coords, puncture->radius);
  const Space M({mpatch});
  std::vector<Patch> ap;
  for (const auto& hp : H.arrows.patches()) ap.push_back(product(product(fib, hp), fib));
  auto G = std::make_shared<Groupoid>();
  G->name = "pullback(" + H.name + ",R" + std::to_string(k) + (puncture ? ",punctured" : "") + ")";
  G->objects = M;
  G->arrows = Space(std::move(ap));
  const Space A = G->arrows;
  const Space HA = H.arrows;
  const Space HO = H.objects;
  struct Parts {
    VectorXd fx;
    Point h;
    VectorXd fy;
  };
  auto split = [k](const Point& g) {
    const auto dh = g.coords.size() - 2 * k;
    return Parts{g.coords.head(k), Point{g.patch, g.coords.segment(k, dh)}, g.coords.tail(k)};
  };
  auto join = [](const VectorXd& fx, const Point& h, const VectorXd& fy) {
    VectorXd c(fx.size() + h.coords.size() + fy.size());
    c << fx, h.coords, fy;
    return Point{h.patch, c};
  };
  auto obj = [](const Point& n, const VectorXd& f) { return Point{0, concat(n.coords, f)}; };
  const SmoothMap hs = H.src, ht = H.tgt, hu = H.unit, hi = H.inv, hm = H.mul;
  auto endpoint = [=](const SmoothMap& e, bool first) {
    return make_map(
        A, M,
        [=](const Point& g) {
          const Parts p = split(g);
          return obj(e(p.h), first ? p.fx : p.fy);
        },
        [=](const Point& g) -> MatrixXd {
          const Parts p = split(g);
          const MatrixXd je = e.jac(p.h);
          const auto dh = p.h.coords.size();
          MatrixXd m = MatrixXd::Zero(dn + k, 2 * k + dh);
          m.block(0, k, dn, dh) = je;
          m.block(dn, first ? 0 : k + dh, k, k).setIdentity();
          return m;
        });
  };
  G->tgt = endpoint(ht, true);
  G->src = endpoint(hs, false);
  G->unit = make_map(
      M, A,
      [=](const Point& x) {
        const Point n{0, x.coords.head(dn)};
        const VectorXd f = x.coords.tail(k);
        return join(f, hu(n), f);
      },
      [=](const Point& x) -> MatrixXd {
        const Point n{0, x.coords.head(dn)};
        const MatrixXd ju = hu.jac(n);
        MatrixXd m = MatrixXd::Zero(2 * k + ju.rows(), dn + k);
        m.block(0, dn, k, k).setIdentity();
        m.block(k, 0, ju.rows(), dn) = ju;
        m.block(k + ju.rows(), dn, k, k).setIdentity();
        return m;
      });
  G->inv = make_map(
      A, A,
      [=](const Point& g) {
        const Parts p = split(g);
        return join(p.fy, hi(p.h), p.fx);
      },
      [=](const Point& g) -> MatrixXd {
        const Parts p = split(g);
        const MatrixXd ji = hi.jac(p.h);
        const auto dh = p.h.coords.size();
        MatrixXd m = MatrixXd::Zero(2 * k + dh, 2 * k + dh);
        m.block(0, k + dh, k, k).setIdentity();
        m.block(k, k, ji.rows(), dh) = ji;
        m.block(k + dh, 0, k, k).setIdentity();
        return m;
      });
  G->mul = make_map(
      product(A, A), A,
      [=](const Point& p) {
        const auto [g, h] = unpack(A, A, p);
        const Parts a = split(g);
        const Parts b = split(h);
        return join(a.fx, hm(pack(HA, HA, a.h, b.h)), b.fy);
      },
      [=](const Point& p) -> MatrixXd {
        const auto [g, h] = unpack(A, A, p);
        const Parts a = split(g);
        const Parts b = split(h);
        const MatrixXd jm = hm.jac(pack(HA, HA, a.h, b.h));
        const auto da = a.h.coords.size();
        const auto db = b.h.coords.size();
        const auto ga = 2 * k + da;
        MatrixXd m = MatrixXd::Zero(2 * k + jm.rows(), ga + 2 * k + db);
        m.block(0, 0, k, k).setIdentity();
        m.block(k, k, jm.rows(), da) = jm.leftCols(da);
        m.block(k, ga + k, jm.rows(), db) = jm.rightCols(db);
        m.block(k + jm.rows(), ga + k + db, k, k).setIdentity();
        return m;
      });
  const GroupoidPtr keep = Hp;
  const SmoothMap src = G->src, tgt = G->tgt;
  G->arrow_guard = [=](const Point& g) {
    return keep->admits_arrow(split(g).h) && M.contains(src(g)) && M.contains(tgt(g));
  };
  auto draw_f = [fib](std::uint64_t seed, std::uint64_t i, std::uint64_t salt) {
    Rng r = make_rng(seed, i, salt);
    return random_coords(fib, r);
  };
  auto ok_arrow = [guard = G->arrow_guard, A](const Point& g) { return A.contains(g) && guard(g); };
  G->sample_object = [=](std::uint64_t seed, std::uint64_t i) {
    return retry_admissible([&](Rng& r) { return obj(keep->sample_object(seed, i), random_coords(fib, r)); },
                            [M](const Point& x) { return M.contains(x); }, seed, i, kObject);
  };
  G->sample_arrow = [=](std::uint64_t seed, std::uint64_t i) {
    const Point h = keep->sample_arrow(seed, i);
    return retry_admissible([&](Rng& r) { return join(random_coords(fib, r), h, random_coords(fib, r)); }, ok_arrow,
                            seed, i, kArrow);
  };
  G->sample_pair = [=](std::uint64_t seed, std::uint64_t i) {
    const auto [a, b] = keep->sample_pair(seed, i);
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
      const VectorXd f1 = draw_f(seed, i, kPair + 3 * attempt);
      const VectorXd f2 = draw_f(seed, i, kPair + 3 * attempt + 1);
      const VectorXd f3 = draw_f(seed, i, kPair + 3 * attempt + 2);
      const Point g = join(f1, a, f2);
      const Point h = join(f2, b, f3);
      if (ok_arrow(g) && ok_arrow(h)) return std::make_pair(g, h);
    }
    throw Error(ErrorCode::SamplerFailure, "no admissible composable pair");
  };
  G->sample_sfiber = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    const Point n{0, x.coords.head(dn)};
    const VectorXd fy = x.coords.tail(k);
    const Point h = keep->sample_sfiber(n, seed, i);
    return retry_admissible([&](Rng& r) { return join(random_coords(fib, r), h, fy); }, ok_arrow, seed, i, kFiber);
  };
  const Space F({fib});
  G->object_path = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    Rng r = make_rng(seed, i, kPath);
    const BasePath nb = keep->object_path(Point{0, x.coords.head(dn)}, seed, i);
    return joined(M, {nb, wiggle(F, Point{0, x.coords.tail(k)}, r)}, [](const std::vector<Point>&) { return 0; });
  };
  auto assemble = [=](const BasePath& fx, const BasePath& h, const BasePath& fy) {
    return joined(A, {fx, h, fy}, [](const std::vector<Point>& pts) { return pts[1].patch; });
  };
  G->arrow_path = [=](const Point& g, std::uint64_t seed, std::uint64_t i) {
    const Parts p = split(g);
    Rng r = make_rng(seed, i, kPath);
    const BasePath fx = wiggle(F, Point{0, p.fx}, r);
    const BasePath fy = wiggle(F, Point{0, p.fy}, r);
    return assemble(fx, keep->arrow_path(p.h, seed, i), fy);
  };
  G->pair_paths = [=](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
    const Parts a = split(g);
    const Parts b = split(h);
    Rng r = make_rng(seed, i, kPath);
    const BasePath f1 = wiggle(F, Point{0, a.fx}, r);
    const BasePath f2 = wiggle(F, Point{0, b.fx}, r);
    const BasePath f3 = wiggle(F, Point{0, b.fy}, r);
    const auto [ha, hb] = keep->pair_paths(a.h, b.h, seed, i);
    return std::make_pair(assemble(f1, ha, f2), assemble(f2, hb, f3));
  };
  if (puncture) G->landmark_objects.push_back(M.make_point(0, puncture->coords + VectorXd::Constant(dn + k, 0.01)));
  G->traits = {false, false, H.traits.source_connected, false};
  return G;
}

GroupoidPtr disjoint_union(const GroupoidPtr& ap, const GroupoidPtr& bp) {
  const Groupoid& a = *ap;
  const Groupoid& b = *bp;
  auto G = std::make_shared<Groupoid>();
  G->name = a.name + "+" + b.name;
  G->objects = mec::disjoint_union(a.objects, b.objects);
  G->arrows = mec::disjoint_union(a.arrows, b.arrows);
  const int na = a.arrows.size();
  const int no = a.objects.size();
  auto shift = [](Point p, int by) {
    p.patch += by;
    return p;
  };
  // Lifts a map componentwise, given the patch offsets of domain and codomain.
  auto lift = [=](const SmoothMap& fa, const SmoothMap& fb, const Space& dom, const Space& cod, int dom_split,
                  int da_off, int ca_off) {
    (void)da_off;
    return make_map(
        dom, cod,
        [=](const Point& p) { return p.patch < dom_split ? fa(p) : shift(fb(shift(p, -dom_split)), ca_off); },
        [=](const Point& p) -> MatrixXd { return p.patch < dom_split ? fa.jac(p) : fb.jac(shift(p, -dom_split)); });
  };
  G->src = lift(a.src, b.src, G->arrows, G->objects, na, 0, no);
  G->tgt = lift(a.tgt, b.tgt, G->arrows, G->objects, na, 0, no);
  G->inv = lift(a.inv, b.inv, G->arrows, G->arrows, na, 0, na);
  G->unit = lift(a.unit, b.unit, G->objects, G->arrows, no, 0, na);
  const Space A = G->arrows;
  const Space AA = a.arrows, BA = b.arrows;
  const SmoothMap am = a.mul, bm = b.mul;
  G->mul = make_map(
      product(A, A), A,
      [=](const Point& p) {
        const auto [g, h] = unpack(A, A, p);
        if ((g.patch < na) != (h.patch < na)) throw Error(ErrorCode::NotComposable, "arrows in different components");
        if (g.patch < na) return am(pack(AA, AA, g, h));
        return shift(bm(pack(BA, BA, shift(g, -na), shift(h, -na))), na);
      },
      [=](const Point& p) -> MatrixXd {
        const auto [g, h] = unpack(A, A, p);
        if (g.patch < na) return am.jac(pack(AA, AA, g, h));
        return bm.jac(pack(BA, BA, shift(g, -na), shift(h, -na)));
      });
  const GroupoidPtr ka = ap, kb = bp;
  G->arrow_guard = [=](const Point& g) {
    return g.patch < na ? ka->admits_arrow(g) : kb->admits_arrow(shift(g, -na));
  };
  G->object_guard = [=](const Point& x) {
    return x.patch < no ? ka->admits_object(x) : kb->admits_object(shift(x, -no));
  };
  G->sample_object = [=](std::uint64_t seed, std::uint64_t i) {
    return i % 2 == 0 ? ka->sample_object(seed, i / 2) : shift(kb->sample_object(seed, i / 2), no);
  };
  G->sample_arrow = [=](std::uint64_t seed, std::uint64_t i) {
    return i % 2 == 0 ? ka->sample_arrow(seed, i / 2) : shift(kb->sample_arrow(seed, i / 2), na);
  };
  G->sample_pair = [=](std::uint64_t seed, std::uint64_t i) {
    if (i % 2 == 0) return ka->sample_pair(seed, i / 2);
    const auto [g, h] = kb->sample_pair(seed, i / 2);
    return std::make_pair(shift(g, na), shift(h, na));
  };
  G->sample_sfiber = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    return x.patch < no ? ka->sample_sfiber(x, seed, i) : shift(kb->sample_sfiber(shift(x, -no), seed, i), na);
  };
  auto shifted_path = [=](BasePath p, int by, const Space& S) {
    p.space = S;
    p.at = [f = p.at, by](double t) {
      Point q = f(t);
      q.patch += by;
      return q;
    };
    return p;
  };
  const Space O = G->objects;
  G->object_path = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    return x.patch < no ? shifted_path(ka->object_path(x, seed, i), 0, O)
                        : shifted_path(kb->object_path(shift(x, -no), seed, i), no, O);
  };
  G->arrow_path = [=](const Point& g, std::uint64_t seed, std::uint64_t i) {
    return g.patch < na ? shifted_path(ka->arrow_path(g, seed, i), 0, A)
                        : shifted_path(kb->arrow_path(shift(g, -na), seed, i), na, A);
  };
  G->pair_paths = [=](const Point& g, const Point& h, std::uint64_t seed, std::uint64_t i) {
    if (g.patch < na) {
      const auto [x, y] = ka->pair_paths(g, h, seed, i);
      return std::make_pair(shifted_path(x, 0, A), shifted_path(y, 0, A));
    }
    const auto [x, y] = kb->pair_paths(shift(g, -na), shift(h, -na), seed, i);
    return std::make_pair(shifted_path(x, na, A), shifted_path(y, na, A));
  };
  if (a.haar && b.haar) {
    G->haar = [=](const Point& x, int nodes) {
      if (x.patch < no) return ka->haar(x, nodes);
      auto out = kb->haar(shift(x, -no), nodes);
      for (auto& node : out) node.arrow.patch += na;
      return out;
    };
  }
  G->landmark_objects = a.landmark_objects;
  for (const auto& l : b.landmark_objects) G->landmark_objects.push_back(shift(l, no));
  G->traits = {a.traits.proper && b.traits.proper, a.traits.source_proper && b.traits.source_proper,
               a.traits.source_connected && b.traits.source_connected, a.traits.is_unit && b.traits.is_unit};
  return G;
}

GroupoidPtr with_object_puncture(const GroupoidPtr& gp, const Puncture& puncture) {
  auto G = std::make_shared<Groupoid>(*gp);
  const Patch& po = single_patch(gp->objects, "object puncture");
  Patch punctured = po;
  punctured.exclude(puncture.coords, puncture.radius);
  G->objects = Space({punctured});
  G->name = gp->name + "[punctured]";
  const Space O = G->objects;
  const GroupoidPtr keep = gp;
  const SmoothMap src = gp->src, tgt = gp->tgt;
  G->object_guard = [=](const Point& x) { return O.contains(x) && keep->admits_object(x); };
  G->arrow_guard = [=](const Point& g) { return keep->admits_arrow(g) && O.contains(src(g)) && O.contains(tgt(g)); };
  const auto obj_ok = G->object_guard;
  const auto arr_ok = G->arrow_guard;
  G->src.codomain = O;
  G->tgt.codomain = O;
  G->unit.domain = O;
  // Retries move the sample index into a disjoint range.
  auto retry = [](const auto& draw, const auto& ok, std::uint64_t seed, std::uint64_t i) {
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
      auto v = draw(seed, i + (attempt << 40));
      if (ok(v)) return v;
    }
    throw Error(ErrorCode::SamplerFailure, "no admissible sample away from the puncture");
  };
  G->sample_object = [=](std::uint64_t seed, std::uint64_t i) {
    return retry([&](std::uint64_t s, std::uint64_t j) { return keep->sample_object(s, j); }, obj_ok, seed, i);
  };
  G->sample_arrow = [=](std::uint64_t seed, std::uint64_t i) {
    return retry([&](std::uint64_t s, std::uint64_t j) { return keep->sample_arrow(s, j); }, arr_ok, seed, i);
  };
  G->sample_pair = [=](std::uint64_t seed, std::uint64_t i) {
    return retry([&](std::uint64_t s, std::uint64_t j) { return keep->sample_pair(s, j); },
                 [&](const std::pair<Point, Point>& p) { return arr_ok(p.first) && arr_ok(p.second); }, seed, i);
  };
  G->sample_sfiber = [=](const Point& x, std::uint64_t seed, std::uint64_t i) {
    return retry([&](std::uint64_t s, std::uint64_t j) { return keep->sample_sfiber(x, s, j); }, arr_ok, seed, i);
  };
  G->landmark_objects.clear();
  G->traits.proper = false;
  G->traits.source_proper = false;
  return G;
}

// ---------------------------------------------------------------------------

MorphismPtr identity(const GroupoidPtr& g) {
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "id(" + g->name + ")";
  m->total = g;
  m->base = g;
  m->arrow_map = identity_map(g->arrows);
  m->object_map = identity_map(g->objects);
  if (g->traits.is_unit) m->kernel = KernelData{m, identity_map(g->arrows)};
  return m;
}

MorphismPtr compose(const MorphismPtr& outer, const MorphismPtr& inner) {
  if (inner->base.get() != outer->total.get() && inner->base->name != outer->total->name) {
    throw Error(ErrorCode::IncompatibleMorphisms, inner->name + " does not land in the source of " + outer->name);
  }
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = outer->name + "o" + inner->name;
  m->total = inner->total;
  m->base = outer->base;
  m->arrow_map = mec::compose(outer->arrow_map, inner->arrow_map);
  m->object_map = mec::compose(outer->object_map, inner->object_map);
  return m;
}

namespace {

// Family K -> unit(N) given the arrow projection and object projection.
MorphismPtr family_over(const GroupoidPtr& K, const Space& N, SmoothMap arrow_proj, SmoothMap object_proj,
                        const std::string& name) {
  auto f = std::make_shared<GroupoidMorphism>();
  f->name = name;
  f->total = K;
  f->base = unit_groupoid(N);
  f->arrow_map = std::move(arrow_proj);
  f->object_map = std::move(object_proj);
  return f;
}

SmoothMap head_map(const Space& dom, const Space& cod, int d) {
  return make_map(
      dom, cod, [d](const Point& p) { return Point{0, p.coords.head(d)}; },
      [d](const Point& p) -> MatrixXd {
        MatrixXd m = MatrixXd::Zero(d, p.coords.size());
        m.leftCols(d).setIdentity();
        return m;
      });
}

}  // namespace

MorphismPtr luca() {
  const Space pt = Space::point();
  const GroupoidPtr R2 = group_bundle(pt, {GroupKind::Vector, 2});
  const GroupoidPtr S1 = group_bundle(pt, {GroupKind::Circle, 1});
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "R2->S1";
  m->total = R2;
  m->base = S1;
  const Space B = S1->arrows;
  m->arrow_map = make_map(
      R2->arrows, B, [B](const Point& g) { return B.make_point(0, g.coords.head(1)); },
      [](const Point&) -> MatrixXd {
        MatrixXd j(1, 2);
        j << 1.0, 0.0;
        return j;
      });
  m->object_map = identity_map(pt);
  return m;
}

MorphismPtr action_projection(int order, bool trivial) {
  const GroupoidPtr G = action(order, trivial);
  const Space pt = Space::point();
  const GroupoidPtr H =
      order == 0 ? group_bundle(pt, {GroupKind::Circle, 1}) : group_bundle(pt, {GroupKind::Finite, order});
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "pr1:" + G->name;
  m->total = G;
  m->base = H;
  const Space HA = H->arrows;
  if (order == 0) {
    m->arrow_map = head_map(G->arrows, HA, 1);
  } else {
    m->arrow_map = make_map(G->arrows, HA, [](const Point& g) { return Point{g.patch, VectorXd(0)}; },
                            [](const Point&) -> MatrixXd { return MatrixXd::Zero(0, 2); });
  }
  m->object_map = make_map(G->objects, pt, [](const Point&) { return Point{0, VectorXd(0)}; },
                           [](const Point&) -> MatrixXd { return MatrixXd::Zero(0, 2); });
  m->action = ActionLayout{order == 0 ? 1 : 0};
  const GroupoidPtr K = unit_groupoid(G->objects);
  const SmoothMap to_pt = m->object_map;
  m->kernel = KernelData{family_over(K, pt, to_pt, to_pt, "kernel(" + m->name + ")"), G->unit};
  return m;
}

MorphismPtr pullback_projection(const GroupoidPtr& H, int k, std::optional<Puncture> puncture) {
  const GroupoidPtr G = pullback(H, k, puncture);
  const int dn = H->objects.dim(0);
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "pr:" + G->name;
  m->total = G;
  m->base = H;
  const Space HA = H->arrows;
  m->arrow_map = make_map(
      G->arrows, HA,
      [k](const Point& g) { return Point{g.patch, g.coords.segment(k, g.coords.size() - 2 * k)}; },
      [k](const Point& g) -> MatrixXd {
        const auto dh = g.coords.size() - 2 * k;
        MatrixXd j = MatrixXd::Zero(dh, g.coords.size());
        j.block(0, k, dh, dh).setIdentity();
        return j;
      });
  m->object_map = head_map(G->objects, H->objects, dn);

  GroupoidPtr K = trivial_family(H->objects, pair(Space::euclidean(k, "F")));
  if (puncture) K = with_object_puncture(K, *puncture);
  const SmoothMap hu = H->unit;
  const Space A = G->arrows;
  SmoothMap embed = make_map(
      K->arrows, A,
      [=](const Point& q) {
        const Point u = hu(Point{0, q.coords.head(dn)});
        VectorXd c(2 * k + u.coords.size());
        c << q.coords.segment(dn, k), u.coords, q.coords.tail(k);
        return Point{u.patch, c};
      },
      [=](const Point& q) -> MatrixXd {
        const MatrixXd ju = hu.jac(Point{0, q.coords.head(dn)});
        MatrixXd j = MatrixXd::Zero(2 * k + ju.rows(), dn + 2 * k);
        j.block(0, dn, k, k).setIdentity();
        j.block(k, 0, ju.rows(), dn) = ju;
        j.block(k + ju.rows(), dn + k, k, k).setIdentity();
        return j;
      });
  m->kernel = KernelData{family_over(K, H->objects, head_map(K->arrows, H->objects, dn),
                                     head_map(K->objects, H->objects, dn), "kernel(" + m->name + ")"),
                         embed};
  return m;
}

MorphismPtr family_projection(const Space& N, const GroupoidPtr& F) {
  const GroupoidPtr G = trivial_family(N, F);
  const int dn = N.dim(0);
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "pr:" + G->name;
  m->total = G;
  m->base = unit_groupoid(N);
  m->arrow_map = head_map(G->arrows, N, dn);
  m->object_map = head_map(G->objects, N, dn);
  m->kernel = KernelData{m, identity_map(G->arrows)};
  return m;
}

MorphismPtr group_bundle_projection(const Space& N, GroupSpec gamma, std::optional<Puncture> puncture) {
  const GroupoidPtr G = group_bundle(N, gamma, puncture);
  const int dn = N.dim(0);
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "pr:" + G->name;
  m->total = G;
  m->base = unit_groupoid(N);
  m->arrow_map = head_map(G->arrows, N, dn);
  m->object_map = identity_map(N);
  m->kernel = KernelData{m, identity_map(G->arrows)};
  return m;
}

MorphismPtr product_projection(const GroupoidPtr& H, const Space& P) {
  const GroupoidPtr G = product_with_manifold(H, P);
  const int dp = P.dim(0);
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "pr1:" + G->name;
  m->total = G;
  m->base = H;
  auto drop_tail = [dp](const Space& dom, const Space& cod) {
    return make_map(
        dom, cod, [dp](const Point& p) { return Point{p.patch, p.coords.head(p.coords.size() - dp)}; },
        [dp](const Point& p) -> MatrixXd {
          const auto d = p.coords.size() - dp;
          MatrixXd j = MatrixXd::Zero(d, p.coords.size());
          j.leftCols(d).setIdentity();
          return j;
        });
  };
  m->arrow_map = drop_tail(G->arrows, H->arrows);
  m->object_map = drop_tail(G->objects, H->objects);
  const GroupoidPtr K = unit_groupoid(G->objects);
  const SmoothMap hu = H->unit;
  const SmoothMap embed = make_map(
      K->arrows, G->arrows,
      [=](const Point& x) {
        const Point u = hu(Point{x.patch, x.coords.head(x.coords.size() - dp)});
        return Point{u.patch, concat(u.coords, x.coords.tail(dp))};
      },
      [=](const Point& x) -> MatrixXd {
        return block_diag(hu.jac(Point{x.patch, x.coords.head(x.coords.size() - dp)}), MatrixXd::Identity(dp, dp));
      });
  m->kernel = KernelData{family_over(K, H->objects, drop_tail(K->arrows, H->objects),
                                     drop_tail(K->objects, H->objects), "kernel(" + m->name + ")"),
                         embed};
  return m;
}

MorphismPtr pair_projection(const Space& N, const Space& F, std::optional<Puncture> puncture) {
  const Patch& pn = single_patch(N, "pair projection base");
  const Patch& pf = single_patch(F, "pair projection fibre");
  const int dn = pn.dim();
  const int df = pf.dim();
  Patch mp = product(pn, pf);
  if (puncture) mp.exclude(puncture->coords, puncture->radius);
  const Space M({mp});
  const GroupoidPtr G = pair(M);
  const GroupoidPtr H = pair(N);
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "Pair(" + mp.label() + ")->Pair(" + pn.label() + ")";
  m->total = G;
  m->base = H;
  const Space HA = H->arrows;
  const int d = dn + df;
  m->arrow_map = make_map(
      G->arrows, HA,
      [=](const Point& g) {
        return HA.make_point(0, concat(g.coords.head(dn), g.coords.segment(d, dn)));
      },
      [=](const Point&) -> MatrixXd {
        MatrixXd j = MatrixXd::Zero(2 * dn, 2 * d);
        j.block(0, 0, dn, dn).setIdentity();
        j.block(dn, d, dn, dn).setIdentity();
        return j;
      });
  m->object_map = head_map(M, N, dn);

  GroupoidPtr K = trivial_family(N, pair(F));
  if (puncture) K = with_object_puncture(K, *puncture);
  const Space GA = G->arrows;
  const SmoothMap embed = make_map(
      K->arrows, GA,
      [=](const Point& q) {
        VectorXd c(2 * d);
        c << q.coords.head(dn), q.coords.segment(dn, df), q.coords.head(dn), q.coords.tail(df);
        return GA.make_point(0, c);
      },
      [=](const Point&) -> MatrixXd {
        MatrixXd j = MatrixXd::Zero(2 * d, dn + 2 * df);
        j.block(0, 0, dn, dn).setIdentity();
        j.block(dn, dn, df, df).setIdentity();
        j.block(d, 0, dn, dn).setIdentity();
        j.block(d + dn, dn + df, df, df).setIdentity();
        return j;
      });
  m->kernel = KernelData{family_over(K, N, head_map(K->arrows, N, dn), head_map(K->objects, N, dn),
                                     "kernel(" + m->name + ")"),
                         embed};
  return m;
}

MorphismPtr cover_example(int order, double x0, double radius) {
  const Space N = real_line();
  const GroupoidPtr H = group_bundle(N, {GroupKind::Finite, order});
  const GroupoidPtr Hs = group_bundle(N, {GroupKind::Finite, order}, Puncture{VectorXd::Constant(1, x0), radius});
  const GroupoidPtr G = disjoint_union(H, Hs);
  auto m = std::make_shared<GroupoidMorphism>();
  m->name = "cover:" + G->name + "->" + H->name;
  m->total = G;
  m->base = H;
  auto id1 = [](const Point&) -> MatrixXd { return MatrixXd::Identity(1, 1); };
  m->arrow_map = make_map(G->arrows, H->arrows, [order](const Point& g) { return Point{g.patch % order, g.coords}; }, id1);
  m->object_map = make_map(G->objects, N, [](const Point& x) { return Point{0, x.coords}; }, id1);
  const GroupoidPtr K = unit_groupoid(G->objects);
  const SmoothMap to_n = m->object_map;
  const SmoothMap gu = G->unit;
  m->kernel = KernelData{family_over(K, N, to_n, to_n, "kernel(" + m->name + ")"), gu};
  return m;
}

// ---------------------------------------------------------------------------

namespace {

double param(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

int int_param(const Params& p, const std::string& key, int fallback) {
  const double v = param(p, key, fallback);
  if (std::floor(v) != v) throw Error(ErrorCode::InvalidParams, key + " must be an integer");
  return static_cast<int>(v);
}

Space base_space(const Params& p) {
  const int lin = int_param(p, "base_lin", 1);
  const int circ = int_param(p, "base_circ", 0);
  if (lin < 0 || circ < 0) throw Error(ErrorCode::InvalidParams, "negative base dimension");
  return Space({Patch(lin, circ, "N")});
}

GroupSpec group_spec(const Params& p) {
  const int kind = int_param(p, "group", 0);
  switch (kind) {
    case 0: return {GroupKind::Finite, int_param(p, "order", 2)};
    case 1: return {GroupKind::Circle, 1};
    case 2: return {GroupKind::Vector, int_param(p, "dim", 1)};
    default: throw Error(ErrorCode::InvalidParams, "group must be 0 (finite), 1 (circle) or 2 (vector)");
  }
}

}  // namespace

std::vector<std::string> names() {
  return {"pair", "action", "group_bundle", "punctured_group_bundle", "pullback", "trivial_family",
          "disjoint_union", "product_with_manifold"};
}

Entry by_name(const std::string& name, const Params& p) {
  const double radius = param(p, "radius", 1e-3);
  if (name == "pair") return pair(base_space(p));
  if (name == "action") return action_projection(int_param(p, "order", 0), param(p, "trivial", 0.0) != 0.0);
  if (name == "group_bundle") return group_bundle_projection(base_space(p), group_spec(p));
  if (name == "punctured_group_bundle") {
    const Space n = base_space(p);
    return group_bundle_projection(n, {GroupKind::Finite, int_param(p, "order", 2)},
                                   Puncture{VectorXd::Constant(n.dim(0), param(p, "x0", 0.0)), radius});
  }
  if (name == "pullback") {
    const GroupoidPtr H = pair(base_space(p));
    return pullback_projection(H, int_param(p, "fiber_dim", 1));
  }
  if (name == "trivial_family") {
    return family_projection(base_space(p), group_bundle(real_line("F"), group_spec(p)));
  }
  if (name == "disjoint_union") {
    return cover_example(int_param(p, "order", 2), param(p, "x0", 0.0), radius);
  }
  if (name == "product_with_manifold") {
    return product_projection(pair(base_space(p)), Space::euclidean(int_param(p, "p_dim", 1), "P"));
  }
  throw Error(ErrorCode::UnknownName, "no catalog entry named '" + name + "'");
}

}  // namespace mec::catalog

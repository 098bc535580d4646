#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mec/groupoid.hpp"

namespace mec::catalog {

enum class GroupKind { Finite, Circle, Vector };

struct GroupSpec {
  GroupKind kind = GroupKind::Finite;
  int size = 2;  // order of a finite group, or dimension of a vector group
};

struct Puncture {
  Eigen::VectorXd coords;
  double radius = 1e-3;
};

GroupoidPtr unit_groupoid(const Space& n);
// M x M over a single-patch M; exclusions of M remove arrows touching them.
GroupoidPtr pair(const Space& m);
// N x Gamma over a single-patch N. A puncture removes {x0} x (Gamma \ {e})
// and is only available for finite Gamma.
GroupoidPtr group_bundle(const Space& n, GroupSpec gamma, std::optional<Puncture> puncture = {});
// K acting on R^2 by rotations: K = SO(2) when order == 0, else Z_order.
GroupoidPtr action(int order, bool trivial);
// pi_0^* H for pi_0 = pr_1: N x R^k -> N; arrows are charted as (f_x, h, f_y).
GroupoidPtr pullback(const GroupoidPtr& h, int fiber_dim, std::optional<Puncture> puncture = {});
// N x F over N x F_0; arrows charted as (n, f).
GroupoidPtr trivial_family(const Space& n, const GroupoidPtr& fiber);
// H x P over N x P with P a unit groupoid; arrows charted as (h, p).
GroupoidPtr product_with_manifold(const GroupoidPtr& h, const Space& p);
GroupoidPtr disjoint_union(const GroupoidPtr& a, const GroupoidPtr& b);
// Removes a ball around one object and every arrow touching it.
GroupoidPtr with_object_puncture(const GroupoidPtr& g, const Puncture& puncture);

MorphismPtr identity(const GroupoidPtr& g);
MorphismPtr compose(const MorphismPtr& outer, const MorphismPtr& inner);

// (x, y) -> e^{ix} from the vector group R^2 to the circle group.
MorphismPtr luca();
// pr_1: K x| R^2 -> K.
MorphismPtr action_projection(int order, bool trivial);
// pr: pi_0^* H -> H.
MorphismPtr pullback_projection(const GroupoidPtr& h, int fiber_dim, std::optional<Puncture> puncture = {});
// N x F -> unit groupoid of N.
MorphismPtr family_projection(const Space& n, const GroupoidPtr& fiber);
MorphismPtr group_bundle_projection(const Space& n, GroupSpec gamma, std::optional<Puncture> puncture = {});
MorphismPtr product_projection(const GroupoidPtr& h, const Space& p);
// Pair(N x F) -> Pair(N); the optional puncture is a point of N x F.
MorphismPtr pair_projection(const Space& n, const Space& f, std::optional<Puncture> puncture = {});
// (N x Z_n) disjoint-union its punctured copy, mapped identically onto N x Z_n, N = R.
MorphismPtr cover_example(int order, double x0, double radius);

using Params = std::map<std::string, double>;
using Entry = std::variant<GroupoidPtr, MorphismPtr>;

// Addressable entries: pair, action, group_bundle, punctured_group_bundle,
// pullback, trivial_family, disjoint_union, product_with_manifold.
Entry by_name(const std::string& name, const Params& params);
std::vector<std::string> names();

Space real_line(const std::string& label = "R");
Space circle(const std::string& label = "S1");

}  // namespace mec::catalog

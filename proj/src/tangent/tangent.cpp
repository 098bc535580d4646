#include "mec/tangent.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mec/error.hpp"
#include "mec/linalg.hpp"
#include "mec/random.hpp"

namespace mec {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ArrowTangentMaps tangent_structure_maps(const Groupoid& G, const Point& g, const Tolerances& tol) {
  return {jacobian(G.src, g, tol), jacobian(G.tgt, g, tol), jacobian(G.inv, g, tol),
          jacobian(G.unit, G.src(g), tol), jacobian(G.unit, G.tgt(g), tol)};
}

PairTangentMaps tangent_structure_maps(const Groupoid& G, const Point& g, const Point& h, const Tolerances& tol) {
  const MatrixXd Ts = jacobian(G.src, g, tol);
  const MatrixXd Tt = jacobian(G.tgt, h, tol);
  MatrixXd constraint(Ts.rows(), Ts.cols() + Tt.cols());
  constraint << Ts, -Tt;
  PairTangentMaps out;
  out.composable_basis = null_space(constraint, tol.rank_tol);
  out.Tm = G.mul_jacobian(g, h, tol);
  out.Tm_restricted = out.Tm * out.composable_basis;
  return out;
}

namespace {

Witness arrow_witness(std::string what, std::initializer_list<Point> pts) {
  Witness w{std::move(what), {}};
  for (const auto& p : pts) {
    const auto f = flatten(p);
    w.coords.insert(w.coords.end(), f.begin(), f.end());
  }
  return w;
}

struct WorstTracker {
  Report& rep;
  double normalized_at_worst = 0.0;
  const Tolerances& tol;

  void member(const VectorXd& v, const MatrixXd& basis, Witness w) {
    const double d = subspace_distance(v, basis, tol.rank_tol);
    const bool worse = !rep.witness || d > rep.worst_residual;
    rep.absorb(d, w);
    if (worse) normalized_at_worst = d / std::max(v.norm(), 1.0);
  }
};

MatrixXd checked_frame(const FrameField& frames, const Point& g, std::map<int, Eigen::Index>& ranks,
                       const Tolerances& tol) {
  const MatrixXd S = frames(g);
  if (numerical_rank(S, tol.rank_tol) != S.cols()) {
    throw Error(ErrorCode::FrameRankMismatch, "frame columns are dependent");
  }
  auto [it, fresh] = ranks.emplace(g.patch, S.cols());
  if (!fresh && it->second != S.cols()) {
    throw Error(ErrorCode::FrameRankMismatch, "frame rank changes within arrow patch " + std::to_string(g.patch));
  }
  return S;
}

}  // namespace

Report vb_subgroupoid_check(const Groupoid& G, const FrameField& frames, std::size_t n_samples, std::uint64_t seed,
                            const Tolerances& tol, const VbCheckOptions& options) {
  Report rep;
  rep.check = "vb_subgroupoid:" + G.name;
  rep.seed = seed;
  WorstTracker track{rep, 0.0, tol};
  std::map<int, Eigen::Index> frame_ranks;
  std::map<int, int> base_ranks;

  auto unit_projection = [&](const Point& g, const MatrixXd& S) {
    const auto m = tangent_structure_maps(G, g, tol);
    const Point us = G.unit(G.src(g));
    const Point ut = G.unit(G.tgt(g));
    const MatrixXd Ss = checked_frame(frames, us, frame_ranks, tol);
    const MatrixXd St = checked_frame(frames, ut, frame_ranks, tol);
    const Point gi = G.inv(g);
    const MatrixXd Si = checked_frame(frames, gi, frame_ranks, tol);
    for (Eigen::Index c = 0; c < S.cols(); ++c) {
      track.member(m.Ti * S.col(c), Si, arrow_witness("Ti(S_g) in S_{g^-1}", {g}));
      track.member(m.Tu_at_source * (m.Ts * S.col(c)), Ss, arrow_witness("Tu Ts(S_g) in S_{u(s(g))}", {g}));
      track.member(m.Tu_at_target * (m.Tt * S.col(c)), St, arrow_witness("Tu Tt(S_g) in S_{u(t(g))}", {g}));
    }
  };

  auto product_clause = [&](const Point& g, const Point& h, Rng& rng) {
    const MatrixXd Sg = checked_frame(frames, g, frame_ranks, tol);
    const MatrixXd Sh = checked_frame(frames, h, frame_ranks, tol);
    const Point gh = G.multiply(g, h);
    const MatrixXd Sgh = checked_frame(frames, gh, frame_ranks, tol);
    const MatrixXd Ts = jacobian(G.src, g, tol);
    const MatrixXd Tt = jacobian(G.tgt, h, tol);
    MatrixXd constraint(Ts.rows(), Sg.cols() + Sh.cols());
    constraint << Ts * Sg, -Tt * Sh;
    const MatrixXd coeff = null_space(constraint, tol.rank_tol);
    if (coeff.cols() == 0) return;
    const MatrixXd Tm = G.mul_jacobian(g, h, tol);
    std::vector<VectorXd> combos;
    for (Eigen::Index c = 0; c < coeff.cols(); ++c) combos.push_back(coeff.col(c));
    // Rescaled so the sum has unit coefficients in the frame where possible.
    VectorXd all = coeff.rowwise().sum();
    if (all.cwiseAbs().maxCoeff() > 0.0) combos.push_back(all / all.cwiseAbs().maxCoeff());
    for (int k = 0; k < options.combinations; ++k) combos.push_back(coeff * normal_vector(rng, static_cast<int>(coeff.cols())));
    for (const auto& k : combos) {
      VectorXd uv(Sg.rows() + Sh.rows());
      uv << Sg * k.head(Sg.cols()), Sh * k.tail(Sh.cols());
      track.member(Tm * uv, Sgh, arrow_witness("Tm(S_g x S_h) in S_gh", {g, h}));
    }
  };

  for (std::size_t i = 0; i < options.pinned_pairs.size(); ++i) {
    Rng rng = make_rng(seed, i, 91);
    product_clause(options.pinned_pairs[i].first, options.pinned_pairs[i].second, rng);
  }
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng = make_rng(seed, i, 92);
    const Point g = G.sample_arrow(seed, i);
    const MatrixXd S = checked_frame(frames, g, frame_ranks, tol);
    unit_projection(g, S);
    const auto [a, b] = G.sample_pair(seed, i);
    product_clause(a, b, rng);

    // Rank of S|_M ∩ TM, constant per object patch.
    const Point x = G.sample_object(seed, i);
    const Point ux = G.unit(x);
    const MatrixXd Sx = checked_frame(frames, ux, frame_ranks, tol);
    const int r = static_cast<int>(intersect_spans(Sx, jacobian(G.unit, x, tol), tol.rank_tol).cols());
    auto [it, fresh] = base_ranks.emplace(x.patch, r);
    if (!fresh && it->second != r) {
      throw Error(ErrorCode::FrameRankMismatch, "rank of S|_M meet TM varies within object patch");
    }
  }
  rep.samples = n_samples + options.pinned_pairs.size();
  rep.note = "normalized residual at worst sample: " + format_real(track.normalized_at_worst);
  rep.finalize(tol.tol_mult);
  return rep;
}

// ---------------------------------------------------------------------------

double SplittingResult::worst() const {
  return std::max({residual_decomposition, residual_phi, residual_complement, residual_input});
}

namespace {

constexpr double kExact = 1e-12;

double scale_of(const VbFiberData& d) { return 1.0 + d.iota.norm() * d.proj.norm(); }

// h from p: h = (id − ι p) πᵀ (π πᵀ)⁻¹.
MatrixXd h_from_p(const VbFiberData& d, const MatrixXd& p) {
  const MatrixXd right_inv = d.proj.transpose() * (d.proj * d.proj.transpose()).inverse();
  const auto n = d.iota.rows();
  return (MatrixXd::Identity(n, n) - d.iota * p) * right_inv;
}

// p from h: the unique p with ι p = id − h π.
MatrixXd p_from_h(const VbFiberData& d, const MatrixXd& h) {
  const auto n = d.iota.rows();
  const MatrixXd rest = MatrixXd::Identity(n, n) - h * d.proj;
  return (d.iota.transpose() * d.iota).ldlt().solve(d.iota.transpose() * rest);
}

// Distance between two column spans of equal dimension.
double span_gap(const MatrixXd& a, const MatrixXd& b) {
  if (a.cols() == 0 && b.cols() == 0) return 0.0;
  if (a.cols() != b.cols()) return kInf;
  const MatrixXd qa = range_basis(a, 1e-13);
  const MatrixXd qb = range_basis(b, 1e-13);
  if (qa.cols() != qb.cols()) return kInf;
  return (qa * qa.transpose() - qb * qb.transpose()).norm();
}

}  // namespace

SplittingResult splitting_correspondence(const VbFiberData& d, SplittingDatum given) {
  const auto n1 = d.iota.cols();
  const auto n = d.iota.rows();
  const auto n2 = d.proj.rows();
  const double scale = scale_of(d);
  if (d.proj.cols() != n || n1 + n2 != n) throw Error(ErrorCode::NotASplitting, "dimensions do not form a sequence");
  if ((d.proj * d.iota).norm() > kExact * scale) throw Error(ErrorCode::NotASplitting, "pi o iota is not zero");
  if (numerical_rank(d.iota, 1e-12) != n1) throw Error(ErrorCode::NotASplitting, "iota is not injective");
  if (numerical_rank(d.proj, 1e-12) != n2) throw Error(ErrorCode::NotASplitting, "pi is not surjective");

  SplittingResult r;
  r.data = d;
  MatrixXd h;
  MatrixXd p;
  MatrixXd C;
  switch (given) {
    case SplittingDatum::RightSplitting: {
      if (!d.h) throw Error(ErrorCode::NotASplitting, "no right splitting supplied");
      h = *d.h;
      if (h.rows() != n || h.cols() != n2 || (d.proj * h - MatrixXd::Identity(n2, n2)).norm() > kExact * scale) {
        throw Error(ErrorCode::NotASplitting, "pi o h is not the identity");
      }
      p = p_from_h(d, h);
      C = h;
      r.residual_input = (h_from_p(d, p) - h).norm();
      break;
    }
    case SplittingDatum::LeftSplitting: {
      if (!d.p) throw Error(ErrorCode::NotASplitting, "no left splitting supplied");
      p = *d.p;
      if (p.rows() != n1 || p.cols() != n || (p * d.iota - MatrixXd::Identity(n1, n1)).norm() > kExact * scale) {
        throw Error(ErrorCode::NotASplitting, "p o iota is not the identity");
      }
      h = h_from_p(d, p);
      C = h;
      r.residual_input = (p_from_h(d, h) - p).norm();
      break;
    }
    case SplittingDatum::Complement: {
      if (!d.C) throw Error(ErrorCode::NotASplitting, "no complement supplied");
      C = *d.C;
      if (C.rows() != n || C.cols() != n2) throw Error(ErrorCode::NotASplitting, "complement has the wrong rank");
      MatrixXd both(n, n);
      both << d.iota, C;
      if (numerical_rank(both, 1e-12) != n) throw Error(ErrorCode::NotASplitting, "C does not complement im iota");
      // π restricted to C is invertible; h is its inverse composed with the inclusion.
      const MatrixXd piC = d.proj * C;
      h = C * piC.inverse();
      p = p_from_h(d, h);
      r.residual_input = span_gap(h, C);
      break;
    }
  }
  r.data.h = h;
  r.data.p = p;
  r.data.C = C;
  r.residual_decomposition = (h * d.proj + d.iota * p - MatrixXd::Identity(n, n)).norm();
  r.Phi.resize(n1 + n2, n);
  r.Phi << p, d.proj;
  r.Phi_inv.resize(n, n1 + n2);
  r.Phi_inv << d.iota, h;
  r.residual_phi = std::max((r.Phi * r.Phi_inv - MatrixXd::Identity(n, n)).norm(),
                            (r.Phi_inv * r.Phi - MatrixXd::Identity(n, n)).norm());
  r.residual_complement = std::max({(p * C).norm(), span_gap(C, h), span_gap(null_space(p, 1e-13), C)});
  return r;
}

VbFiberData random_splitting_fixture(std::uint64_t seed, std::uint64_t index) {
  Rng rng = make_rng(seed, index, 77);
  const int n1 = uniform_int(rng, 1, 3);
  const int n2 = uniform_int(rng, 1, 3);
  const int n = n1 + n2;
  auto gaussian = [&](int r, int c) {
    MatrixXd m(r, c);
    for (int j = 0; j < c; ++j) m.col(j) = normal_vector(rng, r);
    return m;
  };
  // Redraw until [ι h] is reasonably conditioned, so that the identities
  // hold to a fixed absolute tolerance.
  VbFiberData d;
  for (int attempt = 0;; ++attempt) {
    d.iota = gaussian(n, n1);
    // Rows of π span the left kernel of ι, mixed by a random invertible matrix.
    const MatrixXd left = null_space(d.iota.transpose(), 1e-12).transpose();
    const MatrixXd mix = gaussian(n2, n2) + 2.0 * MatrixXd::Identity(n2, n2);
    d.proj = mix * left;
    const MatrixXd right_inv = d.proj.transpose() * (d.proj * d.proj.transpose()).inverse();
    d.h = right_inv + d.iota * gaussian(n1, n2);
    MatrixXd both(n, n);
    both << d.iota, *d.h;
    const Eigen::VectorXd sv = singular_values(both);
    if (sv.maxCoeff() <= 50.0 * sv.minCoeff() || attempt == 100) break;
  }
  return d;
}

// ---------------------------------------------------------------------------

CoreSide core_side_decomposition(const Groupoid& G, const Point& x, const MatrixXd& frame, const Tolerances& tol) {
  if (numerical_rank(frame, tol.rank_tol) != frame.cols()) {
    throw Error(ErrorCode::DegenerateBasis, "frame at the unit is rank-deficient");
  }
  const Point ux = G.unit(x);
  const MatrixXd Ts = jacobian(G.src, ux, tol);
  const MatrixXd Tu = jacobian(G.unit, x, tol);
  CoreSide out;
  out.core = intersect_spans(frame, null_space(Ts, tol.rank_tol), tol.rank_tol);
  out.side = intersect_spans(frame, Tu, tol.rank_tol);
  // Each frame vector must split as (v − Tu Ts v) + Tu Ts v within the two parts.
  double worst = std::abs(static_cast<double>(out.core.cols() + out.side.cols() - frame.cols()));
  for (Eigen::Index c = 0; c < frame.cols(); ++c) {
    const VectorXd side_part = Tu * (Ts * frame.col(c));
    worst = std::max(worst, subspace_distance(frame.col(c) - side_part, out.core, tol.rank_tol));
    worst = std::max(worst, subspace_distance(side_part, out.side, tol.rank_tol));
  }
  out.complement_residual = worst;
  return out;
}

}  // namespace mec

#include "nopo/observables.hpp"

#include <cmath>

#include "nopo/errors.hpp"

namespace nopo {

PhaseSpaceSample sample_positive_p(const TrajectoryState& state,
                                   const TrajectoryState* partner) {
  PhaseSpaceSample s;
  const cd n1 = state.alpha_s_dag * state.alpha_s;
  const cd n2f1 = n1 * n1;
  if (partner) {
    const cd n2 = partner->alpha_s_dag * partner->alpha_s;
    const cd n2f2 = n2 * n2;
    s.n = 0.5 * (n1.real() + n2.real());
    s.n2f = 0.5 * (n2f1.real() + n2f2.real());
    const cd cc = state.alpha_s_dag * partner->alpha_s;
    s.cc_re = cc.real();
    s.cc_im = cc.imag();
    const cd nn = n1 * n2;
    s.nn = nn.real();
    s.imag_abs = std::max({std::abs(n1.imag()), std::abs(n2.imag()),
                           std::abs(n2f1.imag()), std::abs(n2f2.imag()),
                           std::abs(nn.imag())});
  } else {
    s.n = n1.real();
    s.n2f = n2f1.real();
    s.imag_abs = std::max(std::abs(n1.imag()), std::abs(n2f1.imag()));
  }
  return s;
}

PhaseSpaceSample sample_wigner(const TrajectoryState& state,
                               const TrajectoryState* partner) {
  PhaseSpaceSample s;
  const double i1 = std::norm(state.alpha_s);
  s.n = i1 - 0.5;
  s.n2f = i1 * i1 - 2.0 * i1 + 0.5;
  if (partner) {
    const double i2 = std::norm(partner->alpha_s);
    s.n = 0.5 * ((i1 - 0.5) + (i2 - 0.5));
    s.n2f = 0.5 * ((i1 * i1 - 2.0 * i1 + 0.5) + (i2 * i2 - 2.0 * i2 + 0.5));
    const cd cc = std::conj(state.alpha_s) * partner->alpha_s;
    s.cc_re = cc.real();
    s.cc_im = cc.imag();
    s.nn = (i1 - 0.5) * (i2 - 0.5);
  }
  return s;
}

MomentSet moments_from_ensemble(const std::vector<PhaseSpaceSample>& per_traj,
                                bool has_cross) {
  if (per_traj.empty()) throw EmptyEnsemble("no trajectories to reduce");
  const std::size_t m = per_traj.size();
  double mean[5] = {};
  double imag_sum = 0.0;
  for (const auto& s : per_traj) {
    mean[0] += s.n;
    mean[1] += s.n2f;
    mean[2] += s.cc_re;
    mean[3] += s.cc_im;
    mean[4] += s.nn;
    imag_sum += s.imag_abs;
  }
  for (double& v : mean) v /= static_cast<double>(m);

  MomentSet out;
  out.n_mean = mean[0];
  out.n2_factorial = mean[1];
  out.cross_coherence = cd(mean[2], mean[3]);
  out.cross_number = mean[4];
  out.has_cross = has_cross;
  out.imag_residual = imag_sum / static_cast<double>(m);

  if (m >= 2) {
    double cov[25] = {};
    for (const auto& s : per_traj) {
      const double d[5] = {s.n - mean[0], s.n2f - mean[1], s.cc_re - mean[2],
                           s.cc_im - mean[3], s.nn - mean[4]};
      for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) cov[i * 5 + j] += d[i] * d[j];
      }
    }
    // covariance of the mean
    const double norm = 1.0 / (static_cast<double>(m) * (m - 1));
    for (int i = 0; i < 25; ++i) out.cov[i] = cov[i] * norm;
    out.n_err = std::sqrt(out.cov[0]);
    out.n2f_err = std::sqrt(out.cov[6]);
    out.cross_re_err = std::sqrt(out.cov[12]);
    out.cross_im_err = std::sqrt(out.cov[18]);
    out.cross_number_err = std::sqrt(out.cov[24]);
  }
  return out;
}

MomentSet moments_from_positive_p(const std::vector<PhaseSpaceSample>& per_traj,
                                  bool has_cross) {
  return moments_from_ensemble(per_traj, has_cross);
}

MomentSet moments_from_wigner(const std::vector<PhaseSpaceSample>& per_traj,
                              bool has_cross) {
  return moments_from_ensemble(per_traj, has_cross);
}

MomentSet observables_from_density(const DensityMatrixSingle& rho) {
  MomentSet out;
  for (int n = 0; n <= rho.cutoff; ++n) {
    const double p = rho.at(n, n).real();
    out.n_mean += n * p;
    out.n2_factorial += static_cast<double>(n) * (n - 1) * p;
  }
  return out;
}

PairObservables observables_from_density(const DensityMatrixPair& rho) {
  const int c = rho.cutoff;
  PairObservables out;
  out.cutoff = c;
  out.c_ex.assign(static_cast<std::size_t>(c + 1) * (c + 1), cd{});
  out.c_pp.assign(static_cast<std::size_t>(c + 1) * (c + 1), cd{});
  MomentSet& m = out.moments;
  m.has_cross = true;
  for (int n1 = 0; n1 <= c; ++n1) {
    for (int n2 = 0; n2 <= c; ++n2) {
      const double p = rho.at(n1, n2, n1, n2).real();
      m.n_mean += 0.5 * (n1 + n2) * p;
      m.n2_factorial += 0.5 * (static_cast<double>(n1) * (n1 - 1) +
                               static_cast<double>(n2) * (n2 - 1)) *
                        p;
      m.cross_number += static_cast<double>(n1) * n2 * p;
      if (n1 < c && n2 > 0) {
        m.cross_coherence += std::sqrt(static_cast<double>(n1 + 1) * n2) *
                             rho.at(n1, n2, n1 + 1, n2 - 1);
      }
      out.c_ex[static_cast<std::size_t>(n1) * (c + 1) + n2] =
          rho.at(n1, n2, n2, n1);
      out.c_pp[static_cast<std::size_t>(n1) * (c + 1) + n2] =
          rho.at(n1, n1, n2, n2);
    }
  }
  return out;
}

PairObservables observables_from_density(const SectorPair& rho) {
  const int c = rho.cutoff();
  PairObservables out;
  out.cutoff = c;
  out.c_ex.assign(static_cast<std::size_t>(c + 1) * (c + 1), cd{});
  out.c_pp.assign(static_cast<std::size_t>(c + 1) * (c + 1), cd{});
  MomentSet& m = out.moments;
  m.has_cross = true;
  for (int n1 = 0; n1 <= c; ++n1) {
    for (int n2 = 0; n2 <= c; ++n2) {
      const double p = rho.get(n1, n2, n1, n2).real();
      m.n_mean += 0.5 * (n1 + n2) * p;
      m.n2_factorial += 0.5 * (static_cast<double>(n1) * (n1 - 1) +
                               static_cast<double>(n2) * (n2 - 1)) *
                        p;
      m.cross_number += static_cast<double>(n1) * n2 * p;
      if (n1 < c && n2 > 0) {
        m.cross_coherence += std::sqrt(static_cast<double>(n1 + 1) * n2) *
                             rho.get(n1, n2, n1 + 1, n2 - 1);
      }
      out.c_ex[static_cast<std::size_t>(n1) * (c + 1) + n2] =
          rho.get(n1, n2, n2, n1);
      // the pair-coherence slice lives outside the stored sector except on
      // its diagonal; off-diagonals are identically zero here
      out.c_pp[static_cast<std::size_t>(n1) * (c + 1) + n2] =
          rho.get(n1, n1, n2, n2);
    }
  }
  return out;
}

MomentSet observables_from_density_direct(const DensityMatrixDirect& rho) {
  MomentSet out;
  out.has_cross = (rho.nodes == 2);
  const int np = rho.pump_cutoff, ns = rho.signal_cutoff;
  const std::size_t h = rho.hdim;
  // digit strides: basis = ((p1*(ns+1)+s1)*(np+1)+p2)*(ns+1)+s2 for pairs,
  // p1*(ns+1)+s1 solitary
  const std::size_t st_s2 = 1;
  const std::size_t st_s1 =
      (rho.nodes == 2) ? static_cast<std::size_t>(ns + 1) * (np + 1) : 1;
  for (std::size_t b = 0; b < h; ++b) {
    std::size_t rem = b;
    int s2 = 0;
    if (rho.nodes == 2) {
      s2 = static_cast<int>(rem % (ns + 1));
      rem /= (ns + 1);
      rem /= (np + 1);
    }
    const int s1 = static_cast<int>(rem % (ns + 1));
    const double p = rho.elems[b * h + b].real();
    if (rho.nodes == 2) {
      out.n_mean += 0.5 * (s1 + s2) * p;
      out.n2_factorial += 0.5 * (static_cast<double>(s1) * (s1 - 1) +
                                 static_cast<double>(s2) * (s2 - 1)) *
                          p;
      out.cross_number += static_cast<double>(s1) * s2 * p;
      // <a1^dag a2> = sum sqrt((s1+1) s2) <b| rho |b + st_s1 - st_s2>
      if (s1 < ns && s2 > 0) {
        out.cross_coherence +=
            std::sqrt(static_cast<double>(s1 + 1) * s2) *
            rho.elems[b * h + (b + st_s1 - st_s2)];
      }
    } else {
      out.n_mean += s1 * p;
      out.n2_factorial += static_cast<double>(s1) * (s1 - 1) * p;
    }
  }
  return out;
}

DerivedStats derived_stats(const MomentSet& m) {
  if (!(m.n_mean > 0.0)) {
    throw DivisionByZero("derived_stats requires n_mean > 0, got " +
                         std::to_string(m.n_mean));
  }
  DerivedStats out;
  out.has_cross = m.has_cross;
  const double n = m.n_mean, n2f = m.n2_factorial;
  const double ccr = m.cross_coherence.real(), cci = m.cross_coherence.imag();
  out.g2 = n2f / (n * n);
  out.mandel_q = n2f / n - n;
  out.hz1 = ccr * ccr + cci * cci - m.cross_number;
  out.hz1_normalized = out.hz1 / n;

  // first-order propagation through the covariance of the means,
  // variable order (n, n2f, Re cc, Im cc, nn)
  auto propagate = [&](const double grad[5]) {
    double var = 0.0;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) var += grad[i] * m.cov[i * 5 + j] * grad[j];
    }
    return std::sqrt(std::max(var, 0.0));
  };
  {
    const double g[5] = {-2.0 * n2f / (n * n * n), 1.0 / (n * n), 0, 0, 0};
    out.g2_err = propagate(g);
  }
  {
    const double g[5] = {-n2f / (n * n) - 1.0, 1.0 / n, 0, 0, 0};
    out.mandel_q_err = propagate(g);
  }
  {
    const double g[5] = {0, 0, 2.0 * ccr, 2.0 * cci, -1.0};
    out.hz1_err = propagate(g);
  }
  {
    const double g[5] = {-out.hz1 / (n * n), 0, 2.0 * ccr / n, 2.0 * cci / n,
                         -1.0 / n};
    out.hz1_normalized_err = propagate(g);
  }
  return out;
}

}  // namespace nopo

#include "nopo/fock.hpp"

#include <cmath>
#include <cstring>

namespace nopo {

namespace {

std::vector<double> sqrt_table(int n) {
  std::vector<double> t(n + 1);
  for (int i = 0; i <= n; ++i) t[i] = std::sqrt(static_cast<double>(i));
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityMatrixSingle

DensityMatrixSingle DensityMatrixSingle::vacuum(int cutoff) {
  DensityMatrixSingle rho;
  rho.cutoff = cutoff;
  rho.elems.assign(static_cast<std::size_t>(cutoff + 1) * (cutoff + 1), cd{});
  rho.at(0, 0) = 1.0;
  return rho;
}

double DensityMatrixSingle::trace_real() const {
  double tr = 0.0;
  for (int n = 0; n <= cutoff; ++n) tr += at(n, n).real();
  return tr;
}

void DensityMatrixSingle::hermitize() {
  for (int n = 0; n <= cutoff; ++n) {
    at(n, n) = cd(at(n, n).real(), 0.0);
    for (int m = n + 1; m <= cutoff; ++m) {
      const cd v = 0.5 * (at(n, m) + std::conj(at(m, n)));
      at(n, m) = v;
      at(m, n) = std::conj(v);
    }
  }
}

GainTable::GainTable(const NopoParams& params, int cutoff)
    : big_g_(params.big_g) {
  inv_.resize(cutoff + 2);
  for (int n = 0; n <= cutoff + 1; ++n) {
    inv_[n] = 1.0 / (params.gamma_p + params.big_g * (1.0 + n));
  }
}

void GainTable::set_epsilon(double epsilon_t) {
  e2g_ = big_g_ * epsilon_t * epsilon_t;
}

void rhs_single(const DensityMatrixSingle& rho, const NopoParams& params,
                const GainTable& gain, double gamma_s,
                DensityMatrixSingle& out) {
  const int c = rho.cutoff;
  out.cutoff = c;
  out.elems.assign(rho.elems.size(), cd{});
  const auto sq = sqrt_table(c + 1);
  for (int n = 0; n <= c; ++n) {
    for (int m = 0; m <= c; ++m) {
      cd v = -(gamma_s * (n + m) + gain(n, m) * (n + m + 2)) * rho.at(n, m);
      if (n < c && m < c) {
        v += 2.0 * gamma_s * sq[n + 1] * sq[m + 1] * rho.at(n + 1, m + 1);
      }
      if (n > 0 && m > 0) {
        v += 2.0 * gain(n - 1, m - 1) * sq[n] * sq[m] * rho.at(n - 1, m - 1);
      }
      out.at(n, m) = v;
    }
  }
  (void)params;
}

// ---------------------------------------------------------------------------
// DensityMatrixPair (dense)

DensityMatrixPair DensityMatrixPair::vacuum(int cutoff) {
  DensityMatrixPair rho;
  rho.cutoff = cutoff;
  const std::size_t d = cutoff + 1;
  rho.elems.assign(d * d * d * d, cd{});
  rho.at(0, 0, 0, 0) = 1.0;
  return rho;
}

double DensityMatrixPair::trace_real() const {
  double tr = 0.0;
  for (int n1 = 0; n1 <= cutoff; ++n1) {
    for (int n2 = 0; n2 <= cutoff; ++n2) tr += at(n1, n2, n1, n2).real();
  }
  return tr;
}

void DensityMatrixPair::hermitize() {
  const int d = cutoff + 1;
  const std::size_t dim = static_cast<std::size_t>(d) * d;
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t s = r; s < dim; ++s) {
      const std::size_t ij = r * dim + s;
      const std::size_t ji = s * dim + r;
      const cd v = 0.5 * (elems[ij] + std::conj(elems[ji]));
      elems[ij] = v;
      elems[ji] = std::conj(v);
    }
  }
}

DensityMatrixSingle DensityMatrixPair::partial_trace(int node) const {
  DensityMatrixSingle out;
  out.cutoff = cutoff;
  out.elems.assign(static_cast<std::size_t>(cutoff + 1) * (cutoff + 1), cd{});
  for (int n = 0; n <= cutoff; ++n) {
    for (int m = 0; m <= cutoff; ++m) {
      cd sum{};
      for (int k = 0; k <= cutoff; ++k) {
        sum += (node == 0) ? at(n, k, m, k) : at(k, n, k, m);
      }
      out.at(n, m) = sum;
    }
  }
  return out;
}

void rhs_pair(const DensityMatrixPair& rho, const NetworkConfig& network,
              const GainTable& gain, DensityMatrixPair& out) {
  const int c = rho.cutoff;
  out.cutoff = c;
  out.elems.assign(rho.elems.size(), cd{});
  const double gs = network.nodes[0].gamma_s;
  const double jc = network.coupling_j;
  const auto sq = sqrt_table(c + 1);

  for (int n1 = 0; n1 <= c; ++n1) {
    for (int n2 = 0; n2 <= c; ++n2) {
      for (int m1 = 0; m1 <= c; ++m1) {
        for (int m2 = 0; m2 <= c; ++m2) {
          cd v{};
          // diagonal coefficients: losses, gain saturation, coupling J^dag J
          v -= (gs * (n1 + m1 + n2 + m2) +
                gain(n1, m1) * (n1 + m1 + 2) +
                gain(n2, m2) * (n2 + m2 + 2) +
                jc * (n1 + n2 + m1 + m2)) *
               rho.at(n1, n2, m1, m2);
          // node losses
          if (n1 < c && m1 < c) {
            v += 2.0 * gs * sq[n1 + 1] * sq[m1 + 1] *
                 rho.at(n1 + 1, n2, m1 + 1, m2);
          }
          if (n2 < c && m2 < c) {
            v += 2.0 * gs * sq[n2 + 1] * sq[m2 + 1] *
                 rho.at(n1, n2 + 1, m1, m2 + 1);
          }
          // node gains
          if (n1 > 0 && m1 > 0) {
            v += 2.0 * gain(n1 - 1, m1 - 1) * sq[n1] * sq[m1] *
                 rho.at(n1 - 1, n2, m1 - 1, m2);
          }
          if (n2 > 0 && m2 > 0) {
            v += 2.0 * gain(n2 - 1, m2 - 1) * sq[n2] * sq[m2] *
                 rho.at(n1, n2 - 1, m1, m2 - 1);
          }
          if (jc > 0.0) {
            // 2 J rho J^dag with J = sqrt(j)(a1 - a2)
            if (n1 < c && m1 < c) {
              v += 2.0 * jc * sq[n1 + 1] * sq[m1 + 1] *
                   rho.at(n1 + 1, n2, m1 + 1, m2);
            }
            if (n1 < c && m2 < c) {
              v -= 2.0 * jc * sq[n1 + 1] * sq[m2 + 1] *
                   rho.at(n1 + 1, n2, m1, m2 + 1);
            }
            if (n2 < c && m1 < c) {
              v -= 2.0 * jc * sq[n2 + 1] * sq[m1 + 1] *
                   rho.at(n1, n2 + 1, m1 + 1, m2);
            }
            if (n2 < c && m2 < c) {
              v += 2.0 * jc * sq[n2 + 1] * sq[m2 + 1] *
                   rho.at(n1, n2 + 1, m1, m2 + 1);
            }
            // exchange part of -(J^dag J rho + rho J^dag J)
            if (n1 > 0 && n2 < c) {
              v += jc * sq[n1] * sq[n2 + 1] * rho.at(n1 - 1, n2 + 1, m1, m2);
            }
            if (n2 > 0 && n1 < c) {
              v += jc * sq[n2] * sq[n1 + 1] * rho.at(n1 + 1, n2 - 1, m1, m2);
            }
            if (m1 > 0 && m2 < c) {
              v += jc * sq[m1] * sq[m2 + 1] * rho.at(n1, n2, m1 - 1, m2 + 1);
            }
            if (m2 > 0 && m1 < c) {
              v += jc * sq[m2] * sq[m1 + 1] * rho.at(n1, n2, m1 + 1, m2 - 1);
            }
          }
          out.at(n1, n2, m1, m2) = v;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// SectorPair

SectorPair::SectorPair(int cutoff) : cutoff_(cutoff) {
  offsets_.resize(block_count() + 1);
  std::size_t off = 0;
  for (int s = 0; s < block_count(); ++s) {
    offsets_[s] = off;
    off += static_cast<std::size_t>(block_dim(s)) * block_dim(s);
  }
  offsets_[block_count()] = off;
  data_.assign(off, cd{});
}

SectorPair SectorPair::vacuum(int cutoff) {
  SectorPair rho(cutoff);
  rho.data_[0] = 1.0;  // block S=0 is 1x1: the vacuum element
  return rho;
}

cd SectorPair::get(int n1, int n2, int m1, int m2) const {
  const int s = n1 + n2;
  if (s != m1 + m2) return cd{};
  if (n1 < 0 || n2 < 0 || m1 < 0 || m2 < 0 || n1 > cutoff_ || n2 > cutoff_ ||
      m1 > cutoff_ || m2 > cutoff_) {
    return cd{};
  }
  const int lo = block_lo(s), dim = block_dim(s);
  return data_[offsets_[s] + static_cast<std::size_t>(n1 - lo) * dim +
               (m1 - lo)];
}

void SectorPair::set(int n1, int n2, int m1, int m2, cd v) {
  const int s = n1 + n2;
  if (s != m1 + m2) throw ConfigError("SectorPair::set outside d=0 sector");
  const int lo = block_lo(s), dim = block_dim(s);
  data_[offsets_[s] + static_cast<std::size_t>(n1 - lo) * dim + (m1 - lo)] = v;
}

double SectorPair::trace_real() const {
  double tr = 0.0;
  for (int s = 0; s < block_count(); ++s) {
    const int dim = block_dim(s);
    const cd* b = data_.data() + offsets_[s];
    for (int a = 0; a < dim; ++a) tr += b[a * dim + a].real();
  }
  return tr;
}

void SectorPair::hermitize() {
  for (int s = 0; s < block_count(); ++s) {
    const int dim = block_dim(s);
    cd* b = data_.data() + offsets_[s];
    for (int a = 0; a < dim; ++a) {
      b[a * dim + a] = cd(b[a * dim + a].real(), 0.0);
      for (int c = a + 1; c < dim; ++c) {
        const cd v = 0.5 * (b[a * dim + c] + std::conj(b[c * dim + a]));
        b[a * dim + c] = v;
        b[c * dim + a] = std::conj(v);
      }
    }
  }
}

DensityMatrixPair SectorPair::to_dense() const {
  DensityMatrixPair dense = DensityMatrixPair::vacuum(cutoff_);
  dense.at(0, 0, 0, 0) = 0.0;
  for (int s = 0; s < block_count(); ++s) {
    const int lo = block_lo(s), dim = block_dim(s);
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        const int n1 = lo + a, m1 = lo + b;
        dense.at(n1, s - n1, m1, s - m1) =
            data_[offsets_[s] + static_cast<std::size_t>(a) * dim + b];
      }
    }
  }
  return dense;
}

SectorPair SectorPair::from_dense(const DensityMatrixPair& dense, double tol) {
  SectorPair out(dense.cutoff);
  const int c = dense.cutoff;
  for (int n1 = 0; n1 <= c; ++n1) {
    for (int n2 = 0; n2 <= c; ++n2) {
      for (int m1 = 0; m1 <= c; ++m1) {
        for (int m2 = 0; m2 <= c; ++m2) {
          const cd v = dense.at(n1, n2, m1, m2);
          if (n1 + n2 == m1 + m2) {
            out.set(n1, n2, m1, m2, v);
          } else if (std::abs(v) > tol) {
            throw ConfigError("from_dense: support outside the d=0 sector");
          }
        }
      }
    }
  }
  return out;
}

void SectorPair::rhs(const NetworkConfig& network, const GainTable& gain,
                     SectorPair& out) const {
  const int c = cutoff_;
  const double gs = network.nodes[0].gamma_s;
  const double jc = network.coupling_j;
  const auto sq = sqrt_table(c + 1);
  out.data_.assign(data_.size(), cd{});

  for (int s = 0; s < block_count(); ++s) {
    const int lo = block_lo(s), dim = block_dim(s);
    cd* dst = out.data_.data() + offsets_[s];
    const cd* src = data_.data() + offsets_[s];
    const bool has_up = s + 1 < block_count();
    const int lo_up = has_up ? block_lo(s + 1) : 0;
    const int dim_up = has_up ? block_dim(s + 1) : 0;
    const cd* up = has_up ? data_.data() + offsets_[s + 1] : nullptr;
    const bool has_dn = s >= 1;
    const int lo_dn = has_dn ? block_lo(s - 1) : 0;
    const int dim_dn = has_dn ? block_dim(s - 1) : 0;
    const cd* dn = has_dn ? data_.data() + offsets_[s - 1] : nullptr;

    auto at_same = [&](int n1, int m1) -> cd {
      if (n1 < lo || n1 > lo + dim - 1 || m1 < lo || m1 > lo + dim - 1) {
        return cd{};
      }
      return src[static_cast<std::size_t>(n1 - lo) * dim + (m1 - lo)];
    };
    auto at_up = [&](int n1, int m1) -> cd {
      // element of block S+1 with first-node indices (n1, m1)
      if (!has_up || n1 < lo_up || n1 > lo_up + dim_up - 1 || m1 < lo_up ||
          m1 > lo_up + dim_up - 1) {
        return cd{};
      }
      return up[static_cast<std::size_t>(n1 - lo_up) * dim_up + (m1 - lo_up)];
    };
    auto at_dn = [&](int n1, int m1) -> cd {
      if (!has_dn || n1 < lo_dn || n1 > lo_dn + dim_dn - 1 || m1 < lo_dn ||
          m1 > lo_dn + dim_dn - 1) {
        return cd{};
      }
      return dn[static_cast<std::size_t>(n1 - lo_dn) * dim_dn + (m1 - lo_dn)];
    };

    for (int a = 0; a < dim; ++a) {
      const int n1 = lo + a, n2 = s - n1;
      for (int b = 0; b < dim; ++b) {
        const int m1 = lo + b, m2 = s - m1;
        cd v = -(gs * 2.0 * s + gain(n1, m1) * (n1 + m1 + 2) +
                 gain(n2, m2) * (n2 + m2 + 2) + jc * 2.0 * s) *
               src[static_cast<std::size_t>(a) * dim + b];
        // losses from block S+1
        if (n1 < c && m1 < c) {
          v += 2.0 * gs * sq[n1 + 1] * sq[m1 + 1] * at_up(n1 + 1, m1 + 1);
        }
        if (n2 < c && m2 < c) {
          v += 2.0 * gs * sq[n2 + 1] * sq[m2 + 1] * at_up(n1, m1);
        }
        // gains from block S-1
        if (n1 > 0 && m1 > 0) {
          v += 2.0 * gain(n1 - 1, m1 - 1) * sq[n1] * sq[m1] *
               at_dn(n1 - 1, m1 - 1);
        }
        if (n2 > 0 && m2 > 0) {
          v += 2.0 * gain(n2 - 1, m2 - 1) * sq[n2] * sq[m2] * at_dn(n1, m1);
        }
        if (jc > 0.0) {
          if (n1 < c && m1 < c) {
            v += 2.0 * jc * sq[n1 + 1] * sq[m1 + 1] * at_up(n1 + 1, m1 + 1);
          }
          if (n1 < c && m2 < c) {
            v -= 2.0 * jc * sq[n1 + 1] * sq[m2 + 1] * at_up(n1 + 1, m1);
          }
          if (n2 < c && m1 < c) {
            v -= 2.0 * jc * sq[n2 + 1] * sq[m1 + 1] * at_up(n1, m1 + 1);
          }
          if (n2 < c && m2 < c) {
            v += 2.0 * jc * sq[n2 + 1] * sq[m2 + 1] * at_up(n1, m1);
          }
          if (n1 > 0 && n2 < c) {
            v += jc * sq[n1] * sq[n2 + 1] * at_same(n1 - 1, m1);
          }
          if (n2 > 0 && n1 < c) {
            v += jc * sq[n2] * sq[n1 + 1] * at_same(n1 + 1, m1);
          }
          if (m1 > 0 && m2 < c) {
            v += jc * sq[m1] * sq[m2 + 1] * at_same(n1, m1 - 1);
          }
          if (m2 > 0 && m1 < c) {
            v += jc * sq[m2] * sq[m1 + 1] * at_same(n1, m1 + 1);
          }
        }
        dst[static_cast<std::size_t>(a) * dim + b] = v;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// DensityMatrixDirect

DensityMatrixDirect DensityMatrixDirect::vacuum(int pump_cutoff,
                                                int signal_cutoff, int nodes) {
  DensityMatrixDirect rho;
  rho.pump_cutoff = pump_cutoff;
  rho.signal_cutoff = signal_cutoff;
  rho.nodes = nodes;
  const std::size_t node_dim =
      static_cast<std::size_t>(pump_cutoff + 1) * (signal_cutoff + 1);
  rho.hdim = (nodes == 2) ? node_dim * node_dim : node_dim;
  rho.elems.assign(rho.hdim * rho.hdim, cd{});
  rho.elems[0] = 1.0;
  return rho;
}

double DensityMatrixDirect::trace_real() const {
  double tr = 0.0;
  for (std::size_t b = 0; b < hdim; ++b) tr += elems[b * hdim + b].real();
  return tr;
}

void DensityMatrixDirect::hermitize() {
  for (std::size_t r = 0; r < hdim; ++r) {
    for (std::size_t s = r; s < hdim; ++s) {
      const cd v = 0.5 * (elems[r * hdim + s] + std::conj(elems[s * hdim + r]));
      elems[r * hdim + s] = v;
      elems[s * hdim + r] = std::conj(v);
    }
  }
}

namespace {

// digit decomposition caches for the direct basis
struct DirectLayout {
  int np, ns, nodes;
  std::size_t hdim;
  std::size_t st_p1, st_s1, st_p2, st_s2;
  std::vector<int> p1, s1, p2, s2;  // digit value per basis index

  explicit DirectLayout(const DensityMatrixDirect& rho)
      : np(rho.pump_cutoff), ns(rho.signal_cutoff), nodes(rho.nodes),
        hdim(rho.hdim) {
    st_s2 = 1;
    st_p2 = static_cast<std::size_t>(ns + 1);
    st_s1 = (nodes == 2) ? st_p2 * (np + 1) : 1;
    st_p1 = st_s1 * ((nodes == 2) ? (ns + 1) : (ns + 1));
    if (nodes == 1) {
      st_s1 = 1;
      st_p1 = static_cast<std::size_t>(ns + 1);
    }
    p1.resize(hdim);
    s1.resize(hdim);
    p2.assign(hdim, 0);
    s2.assign(hdim, 0);
    for (std::size_t b = 0; b < hdim; ++b) {
      std::size_t rem = b;
      if (nodes == 2) {
        s2[b] = static_cast<int>(rem % (ns + 1));
        rem /= (ns + 1);
        p2[b] = static_cast<int>(rem % (np + 1));
        rem /= (np + 1);
      }
      s1[b] = static_cast<int>(rem % (ns + 1));
      rem /= (ns + 1);
      p1[b] = static_cast<int>(rem % (np + 1));
    }
  }
};

}  // namespace

double DensityMatrixDirect::top_pump_occupancy() const {
  const DirectLayout lay(*this);
  double occ = 0.0;
  for (std::size_t b = 0; b < hdim; ++b) {
    if (lay.p1[b] == pump_cutoff || (nodes == 2 && lay.p2[b] == pump_cutoff)) {
      occ += elems[b * hdim + b].real();
    }
  }
  return occ;
}

double DensityMatrixDirect::top_signal_occupancy() const {
  const DirectLayout lay(*this);
  double occ = 0.0;
  for (std::size_t b = 0; b < hdim; ++b) {
    if (lay.s1[b] == signal_cutoff ||
        (nodes == 2 && lay.s2[b] == signal_cutoff)) {
      occ += elems[b * hdim + b].real();
    }
  }
  return occ;
}

void rhs_direct(const DensityMatrixDirect& rho, const NetworkConfig& network,
                double epsilon_t, DensityMatrixDirect& out) {
  const auto& p = network.nodes[0];
  const double gp = p.gamma_p, gs = p.gamma_s, g = p.big_g;
  const double jc = network.coupling_j;
  const DirectLayout lay(rho);
  const std::size_t h = rho.hdim;
  const int np = rho.pump_cutoff, ns = rho.signal_cutoff;
  const auto sq = sqrt_table(std::max(np, ns) + 1);

  out.pump_cutoff = np;
  out.signal_cutoff = ns;
  out.nodes = rho.nodes;
  out.hdim = h;
  out.elems.assign(rho.elems.size(), cd{});

  const cd* rr = rho.elems.data();
  cd* oo = out.elems.data();

  // per-node digit accessors: node 0 -> (p1, s1), node 1 -> (p2, s2)
  const int n_nodes = rho.nodes;
  for (std::size_t br = 0; br < h; ++br) {
    const int vp[2] = {lay.p1[br], lay.p2[br]};
    const int vs[2] = {lay.s1[br], lay.s2[br]};
    const std::size_t row = br * h;
    for (std::size_t bc = 0; bc < h; ++bc) {
      const int wp[2] = {lay.p1[bc], lay.p2[bc]};
      const int ws[2] = {lay.s1[bc], lay.s2[bc]};
      const std::size_t i = row + bc;
      cd v{};
      double diag = 0.0;
      for (int r = 0; r < n_nodes; ++r) {
        const std::size_t stp = (r == 0 ? lay.st_p1 : lay.st_p2);
        const std::size_t sts = (r == 0 ? lay.st_s1 : lay.st_s2);
        const std::size_t stp_row = stp * h;
        const std::size_t sts_row = sts * h;
        // coherent drive eps (ap^dag - ap) commutator
        if (vp[r] > 0) v += epsilon_t * sq[vp[r]] * rr[i - stp_row];
        if (vp[r] < np) v -= epsilon_t * sq[vp[r] + 1] * rr[i + stp_row];
        if (wp[r] < np) v -= epsilon_t * sq[wp[r] + 1] * rr[i + stp];
        if (wp[r] > 0) v += epsilon_t * sq[wp[r]] * rr[i - stp];
        // pump loss
        diag += gp * (vp[r] + wp[r]);
        if (vp[r] < np && wp[r] < np) {
          v += 2.0 * gp * sq[vp[r] + 1] * sq[wp[r] + 1] *
               rr[i + stp_row + stp];
        }
        // signal loss
        diag += gs * (vs[r] + ws[r]);
        if (vs[r] < ns && ws[r] < ns) {
          v += 2.0 * gs * sq[vs[r] + 1] * sq[ws[r] + 1] *
               rr[i + sts_row + sts];
        }
        // parametric gain L = sqrt(G) as^dag ap
        diag += g * (vp[r] * (vs[r] + 1) + wp[r] * (ws[r] + 1));
        if (vp[r] < np && vs[r] > 0 && wp[r] < np && ws[r] > 0) {
          v += 2.0 * g * sq[vp[r] + 1] * sq[vs[r]] * sq[wp[r] + 1] *
               sq[ws[r]] * rr[i + stp_row - sts_row + stp - sts];
        }
      }
      if (n_nodes == 2 && jc > 0.0) {
        const std::size_t st1r = lay.st_s1 * h, st2r = lay.st_s2 * h;
        const std::size_t st1c = lay.st_s1, st2c = lay.st_s2;
        diag += jc * (vs[0] + vs[1] + ws[0] + ws[1]);
        // 2 J rho J^dag
        if (vs[0] < ns && ws[0] < ns) {
          v += 2.0 * jc * sq[vs[0] + 1] * sq[ws[0] + 1] *
               rr[i + st1r + st1c];
        }
        if (vs[0] < ns && ws[1] < ns) {
          v -= 2.0 * jc * sq[vs[0] + 1] * sq[ws[1] + 1] *
               rr[i + st1r + st2c];
        }
        if (vs[1] < ns && ws[0] < ns) {
          v -= 2.0 * jc * sq[vs[1] + 1] * sq[ws[0] + 1] *
               rr[i + st2r + st1c];
        }
        if (vs[1] < ns && ws[1] < ns) {
          v += 2.0 * jc * sq[vs[1] + 1] * sq[ws[1] + 1] *
               rr[i + st2r + st2c];
        }
        // exchange part of -(J^dag J rho + rho J^dag J)
        if (vs[0] > 0 && vs[1] < ns) {
          v += jc * sq[vs[0]] * sq[vs[1] + 1] * rr[i - st1r + st2r];
        }
        if (vs[1] > 0 && vs[0] < ns) {
          v += jc * sq[vs[1]] * sq[vs[0] + 1] * rr[i + st1r - st2r];
        }
        if (ws[0] > 0 && ws[1] < ns) {
          v += jc * sq[ws[0]] * sq[ws[1] + 1] * rr[i - st1c + st2c];
        }
        if (ws[1] > 0 && ws[0] < ns) {
          v += jc * sq[ws[1]] * sq[ws[0] + 1] * rr[i + st1c - st2c];
        }
      }
      oo[i] = v - diag * rr[i];
    }
  }
}

// ---------------------------------------------------------------------------
// RK4 evolution

void evolve_rk4(
    std::vector<cd>& state, const NopoParams& params,
    const EvolveOptions& opts,
    const std::function<void(const std::vector<cd>&, double, std::vector<cd>&)>&
        rhs,
    const std::function<void(std::vector<cd>&)>& hermitize,
    const std::function<double(const std::vector<cd>&)>& trace,
    const std::function<void(double, const std::vector<cd>&)>& snapshot,
    EvolveDiagnostics* diag) {
  const double eps_thr = threshold_epsilon(params);
  const std::size_t n = state.size();
  std::vector<cd> k(n), acc(n), tmp(n);
  const long n_steps = std::lround(opts.t_end / opts.dt);
  double max_drift = 0.0;

  for (long step = 0; step < n_steps; ++step) {
    const double t = step * opts.dt;
    const double e0 =
        eps_thr * pump_schedule(opts.target_p, t, opts.ramp_time);
    const double em = eps_thr * pump_schedule(opts.target_p, t + 0.5 * opts.dt,
                                              opts.ramp_time);
    const double e1 =
        eps_thr * pump_schedule(opts.target_p, t + opts.dt, opts.ramp_time);

    rhs(state, e0, k);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] = state[i] + (opts.dt / 6.0) * k[i];
      tmp[i] = state[i] + (0.5 * opts.dt) * k[i];
    }
    rhs(tmp, em, k);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += (opts.dt / 3.0) * k[i];
      tmp[i] = state[i] + (0.5 * opts.dt) * k[i];
    }
    rhs(tmp, em, k);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += (opts.dt / 3.0) * k[i];
      tmp[i] = state[i] + opts.dt * k[i];
    }
    rhs(tmp, e1, k);
    for (std::size_t i = 0; i < n; ++i) state[i] = acc[i] + (opts.dt / 6.0) * k[i];

    hermitize(state);
    const double drift = std::abs(trace(state) - 1.0);
    max_drift = std::max(max_drift, drift);
    if (drift > opts.trace_tol) {
      throw TraceDrift("trace drift " + std::to_string(drift) + " at t=" +
                       std::to_string(t + opts.dt));
    }
    if (opts.snapshot_stride > 0 && (step + 1) % opts.snapshot_stride == 0 &&
        step + 1 < n_steps) {
      snapshot((step + 1) * opts.dt, state);
    }
  }
  snapshot(n_steps * opts.dt, state);
  if (diag) diag->max_trace_drift = max_drift;
}

}  // namespace nopo

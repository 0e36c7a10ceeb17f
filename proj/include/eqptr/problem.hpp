#pragma once

#include <functional>
#include <vector>

#include "eqptr/types.hpp"

namespace eqptr {

/// An element-decomposable nonlinear system with objective and side constraints.
///
/// The global residual, objective, and constraints are sums of element
/// contributions. Element e owns the state entries listed in elem_dofs[e]
/// (the gather/scatter map realizing P_e) and reads, but does not own, the
/// neighbor entries in elem_nbr_dofs[e] (realizing P_e').
struct Problem {
  int n_elements{0};
  int n_state{0};       // N_u
  int n_params{0};      // N_mu
  int n_constraints{0}; // N_c

  Vec param_lower; // mu_l
  Vec param_upper; // mu_u

  std::vector<std::vector<int>> elem_dofs;     // P_e as index lists
  std::vector<std::vector<int>> elem_nbr_dofs; // P_e' as index lists

  // Element residual r_e(u_e, u_e', mu) and partial derivatives.
  std::function<Vec(int e, const Vec& ue, const Vec& un, const Vec& mu)> residual;
  std::function<Mat(int e, const Vec& ue, const Vec& un, const Vec& mu)> residual_du;  // n_e x n_e
  std::function<Mat(int e, const Vec& ue, const Vec& un, const Vec& mu)> residual_dun; // n_e x n_nbr
  std::function<Mat(int e, const Vec& ue, const Vec& un, const Vec& mu)> residual_dmu; // n_e x N_mu

  // Element objective j_e(u_e, mu) and partial derivatives.
  std::function<double(int e, const Vec& ue, const Vec& mu)> objective;
  std::function<RowVec(int e, const Vec& ue, const Vec& mu)> objective_du;  // 1 x n_e
  std::function<RowVec(int e, const Vec& ue, const Vec& mu)> objective_dmu; // 1 x N_mu

  // Element side constraints c_e(u_e, mu) and partial derivatives.
  std::function<Vec(int e, const Vec& ue, const Vec& mu)> constraints;
  std::function<Mat(int e, const Vec& ue, const Vec& mu)> constraints_du;  // N_c x n_e
  std::function<Mat(int e, const Vec& ue, const Vec& mu)> constraints_dmu; // N_c x N_mu

  // Element measures |Omega_e| for the EQP domain-volume constraint.
  Vec element_volumes;

  Vec initial_state; // fallback Newton seed

  Vec gather(int e, const Vec& u) const {
    const auto& idx = elem_dofs[e];
    Vec ue(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) ue[i] = u[idx[i]];
    return ue;
  }
  Vec gather_nbr(int e, const Vec& u) const {
    const auto& idx = elem_nbr_dofs[e];
    Vec un(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) un[i] = u[idx[i]];
    return un;
  }

  void validate() const;
};

}  // namespace eqptr

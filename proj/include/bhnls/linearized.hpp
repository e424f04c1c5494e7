#pragma once

// Linearization at the ground state: the self-adjoint operators
//   L+ = Delta^2 - (N+4)/(N-4) W^{8/(N-4)},   L- = Delta^2 - W^{8/(N-4)},
// the rotated/scaled linearization Z_{theta,lambda}, the coupled eigenpair
//   L+ Y1 = -nu Y2,  L- Y2 = nu Y1,  nu > 0,
// the dual functionals alpha^{+-}, coercivity of the projected quadratic
// forms, and the two-bubble energy expansion audit.

#include <optional>
#include <string>

#include "bhnls/ground_state.hpp"
#include "bhnls/operators.hpp"
#include "bhnls/radial_grid.hpp"

namespace bhnls {

enum class LSign { Plus, Minus };

class LinearizedOps {
 public:
  explicit LinearizedOps(GridPtr grid);

  const RadialGrid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  const LaplacianOp& lap() const { return lap_; }
  const std::vector<double>& potential() const { return V_; }  // W^{8/(N-4)}

  // L{sign} g; real-valued input interpreted componentwise for complex fields
  RadialField apply_L(LSign sign, const RadialField& g) const;
  std::vector<double> apply_L(LSign sign, const std::vector<double>& g) const;

  // Z_{theta,lambda} g = -i Delta^2 g + i f'(e^{i theta} W_lambda) g
  RadialField Z_apply(double theta, double lambda, const RadialField& g) const;

 private:
  GridPtr grid_;
  LaplacianOp lap_;
  std::vector<double> V_;
};

struct EigenPair {
  double nu = 0.0;
  RadialField Y1, Y2;       // real-valued, ||Y1|| = 1, ||Y2|| as computed
  double norm_Y1 = 0.0, norm_Y2 = 0.0;
  double resid_plus = 0.0;   // ||L+ Y1 + nu Y2|| / (nu ||Y2||)
  double resid_minus = 0.0;  // ||L- Y2 - nu Y1|| / (nu ||Y1||)
  double ip_Y1_Y2 = 0.0;     // <Y1, Y2>
  double ip_W_Y1 = 0.0;      // <W, Y1>
  double ip_LamW_Y2 = 0.0;   // <Lambda W, Y2>
  std::vector<double> other_candidates;  // further negative eigenvalues of L-L+ found
};

// L2 residual of the kernel relations, evaluated in quad precision (the
// double path is floored by inner-node flux roundoff):
//   sign = Minus: ||L- W_lambda|| / ||W_lambda^{(N+4)/(N-4)}||
//   sign = Plus:  ||L+ (Lambda W)_lambda|| / ||W_lambda^{(N+4)/(N-4)}||
double kernel_residual_l2(GridPtr grid, LSign sign, double lambda = 1.0);

// pencil shift-invert solve; throws NumericError if no positive nu is found
EigenPair solve_eigenpair(GridPtr grid);
// cached per grid (the pair is expensive); thread-compatible for reads
const EigenPair& eigenpair_cached(GridPtr grid);

// alpha^{+-}_{theta,lambda} pairings: a+- = <alpha^{+-}, g>
struct AlphaPair {
  double plus = 0.0, minus = 0.0;
};
AlphaPair alpha_project(const EigenPair& ep, double theta, double lambda, const RadialField& g);
// the dual fields themselves (e^{i theta}/lambda^4)(Y2 +- i Y1)_lambda
RadialField alpha_field(const EigenPair& ep, double theta, double lambda, int sign);

// ---- projected coercivity ----

enum class FormId {
  LPlus,          // <g,L+g>, projections {W, Y2}
  LMinus,         // <g,L-g>, projection {Lambda W}
  LPlusLocalized, // localized split of the L+ form, projections {W, Y2}
  SingleBubble,   // complex form at (theta, lambda), projections {W, iLamW, alpha+-}
  TwoBubble       // (1/2)<D^2E g,g> at (zeta,mu,theta,lambda), 8 projections
};

struct QuadraticFormReport {
  std::string form_id;
  double min_eigenvalue_projected = 0.0;  // min Rayleigh quotient / int |Delta g|^2
  int projection_rank = 0;
  double zeta = 0.0, mu = 1.0, theta = 0.0, lambda = 1.0;
  double r1 = 0.0;  // localization radius when used
};

struct TwoBubbleParamsLite {
  double zeta = -0.5 * pi, mu = 1.0, theta = 0.0, lambda = 0.05;
  double localized_c = 0.01;   // kinetic split constant of the localized form
  double localized_r1 = 0.0;   // 0 = auto from the potential-tail rule
};

QuadraticFormReport coercivity_min_eig(GridPtr grid, FormId id,
                                       const TwoBubbleParamsLite& params = {},
                                       int coarse_n = 512);

// localization radius from the tail-smallness rule ||V||_{L^{N/4}}(r>=r1) < eps
double localization_radius(GridPtr grid, double eps = 1e-4);

// ---- energy expansion around the two-bubble ----

struct EnergyExpansionReport {
  double E_two_bubble = 0.0;   // E(e^{i zeta} W_mu + e^{i theta} W_lambda + g)
  double E_bubbles = 0.0;      // E at g = 0
  double twoEW = 0.0;          // 2 E(W)
  double interaction = 0.0;    // C1 * theta * lambda^{(N-4)/2}
  // E(bubbles) - E(b1) - E(b2) assembled pointwise, so the large separate
  // energies cancel structurally instead of in floating point
  double interaction_measured = 0.0;
  double first_order = 0.0;    // <DE(bubbles), g>
  double second_order = 0.0;   // (1/2) <D^2E(bubbles) g, g>
  double cubic_remainder = 0.0;
  double expansion_residual = 0.0;  // |interaction_measured - interaction|
  double measured_constant = 0.0;   // residual / (lambda^{(N-4)/2} (|zeta+pi/2|+|mu-1|+|theta|^3+lambda))
  bool regime_warning = false;
};

EnergyExpansionReport energy_expansion_audit(GridPtr grid, double zeta, double mu, double theta,
                                             double lambda, const RadialField& g);

// the two-bubble profile e^{i zeta} W_mu + e^{i theta} W_lambda
RadialField two_bubble(GridPtr grid, double zeta, double mu, double theta, double lambda);
// DE(v) = Delta^2 v - f(v) as a field
RadialField energy_gradient(const RadialField& v, const LaplacianOp& lap);

}  // namespace bhnls

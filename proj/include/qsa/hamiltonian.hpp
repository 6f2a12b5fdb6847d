#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qsa/jet.hpp"
#include "qsa/model.hpp"

namespace qsa {

enum class Variant { Discrete, SemiContinuous, QssDiffusion, VelocityJump, AdiabaticBirthDeath };

std::string_view to_string(Variant v);
/// Accepts the canonical names and the short forms disc, sc, qss, qd, adiabatic.
Variant parse_variant(std::string_view name);
std::vector<Variant> all_variants();

/// Variants whose Hamiltonian is det(A + diag h).
bool is_matrix_variant(Variant v);

/// h(s, x, p) for matrix variants.
double h_component(Variant variant, const ModelSpec& spec, double x, double p, int s);
VectorXd h_vector(Variant variant, const ModelSpec& spec, double x, double p);

/// det(A + diag h) for matrix variants, a p + g p^2 for the QSS diffusion,
/// and the averaged birth-death Hamiltonian for the adiabatic reduction.
double hamiltonian_eval(Variant variant, const ModelSpec& spec, double x, double p);

/// Drift a(x), scaled diffusivity g(x) = <b> + D of the QSS diffusion, and <b>.
struct QssCoefficients {
  double a = 0.0;
  double mean_b = 0.0;
  double D = 0.0;
  double g() const { return mean_b + D; }
};
QssCoefficients qss_coefficients(const ModelSpec& spec, double x);

/// QSS-averaged external rates (rho.W+, rho.W-) of the adiabatic reduction.
struct AveragedRates {
  double birth = 0.0;
  double death = 0.0;
};
AveragedRates averaged_rates(const ModelSpec& spec, double x);

/// x-jets (p-independent) of the QSS drift, <b> and D.
struct QssJets {
  Jet a;
  Jet mean_b;
  Jet D;
};
QssJets qss_jets(const ModelSpec& spec, double x);

enum class PartialsRoute { Auto, ClosedForm, Generic, FiniteDifference };

/// All partials of the scalar Hamiltonian up to total order three at (x, p).
/// Auto picks closed forms for the built-in example and jet arithmetic otherwise.
Jet hamiltonian_partials(Variant variant, const ModelSpec& spec, double x, double p,
                         PartialsRoute route = PartialsRoute::Auto);

/// Jets of each h(s, x, p) (matrix variants only).
std::vector<Jet> h_jets(Variant variant, const ModelSpec& spec, double x, double p);

/// Right (w, sums to 1) and left (l, l.w = 1) null vectors of A + diag h.
struct NullPair {
  VectorXd w;
  VectorXd l;
};

enum class NullspaceRoute { Auto, ClosedForm, Generic };

NullPair conditional_distribution(Variant variant, const ModelSpec& spec, double x, double p,
                                  NullspaceRoute route = NullspaceRoute::Auto);

/// Phi'' at a fixed point from second partials: -2 H_px / H_pp at (x_c, 0).
double curvature_at_fixed_point(Variant variant, const ModelSpec& spec, double x_c);

/// Phi''' at a fixed point, obtained by differentiating H(x, Phi'(x)) = 0 three times.
double third_derivative_at_fixed_point(Variant variant, const ModelSpec& spec, double x_c);

}  // namespace qsa

#pragma once

#include <cstdint>
#include <vector>

#include "simrf/analytics.hpp"
#include "simrf/rng.hpp"

namespace simrf {

struct OptimizerSettings {
    std::size_t restarts = 4;
    std::size_t max_iters = 2000;
    double gradient_tol = 1e-7;
    // Backtracking line search: sufficient-decrease constant and step shrink factor.
    double armijo = 1e-4;
    double shrink = 0.5;
    // When false every restart starts from random directions.
    bool structured_starts = true;

    void validate() const;
};

struct OptimizedDirections {
    Matrix directions;  // d unit rows, first one equal to e_1
    double rho = 0.0;
    double start_rho = 0.0;  // value at the simplex-initialised start
    std::size_t best_restart = 0;
    std::size_t iterations = 0;  // of the best restart
    bool converged = false;      // false means every restart hit max_iters
};

/// Unit vector from d-1 hyperspherical angles.
Vector hyperspherical_to_unit(const Vector& angles);
// Inverse of hyperspherical_to_unit (angles in [0, pi], last in (-pi, pi]).
Vector unit_to_hyperspherical(const Vector& u);

/// Full conformity of the configuration {norms_i * u_i}, with u_1 = e_1 and
/// u_2..u_d given by (d-1) angles each, stacked in `angles`.
double conformity_of_angles(const std::vector<double>& norms, const Vector& angles, double v,
                            const SeriesControl& ctl = {});

// Analytic gradient of conformity_of_angles.
Vector conformity_gradient(const std::vector<double>& norms, const Vector& angles, double v,
                           const SeriesControl& ctl = {});

/// Local minimisation of the full conformity over directions for fixed norms
/// (BFGS with backtracking). Restart 0 starts at the simplex, restart 1 at
/// the SimRF+ fixed point, the rest at random directions drawn from rng.
/// The lowest conformity wins; ties go to the lower restart index.
OptimizedDirections optimize_directions(const std::vector<double>& norms, double v,
                                        const OptimizerSettings& settings,
                                        const RngStream& rng, const SeriesControl& ctl = {});

/// Fig-4 style comparison for one norm draw: IID (expectation plus the
/// mean and spread over 100 random couplings), ORF, SimRF, SimRF+ and
/// optionally the numerical optimum, in that order.
std::vector<ConformityReport> conformity_comparison(std::size_t d, double v,
                                                   const RngStream& rng,
                                                   bool include_numerical,
                                                   const OptimizerSettings& settings = {},
                                                   const SeriesControl& ctl = {});

}  // namespace simrf

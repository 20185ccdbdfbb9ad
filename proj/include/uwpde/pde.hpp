#pragma once

#include "uwpde/contrast.hpp"
#include "uwpde/image.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace uwpde {

/// Which evolution law drives the image.
///
///  - Eq2: I_t = lambda * D(|grad I|) * kappa + lambda_f * f{I} + lambda_c * (I - m) / sigma
///  - Eq3: I_t = lambda * D(|grad I|) * kappa + lambda_l * (f_l{I} - I)
///               + lambda_g * f_g{I} + lambda_c * (I - mu) / sigma
///
/// with kappa = div(grad I / |grad I|), m the histogram mode and mu the mean.
/// In Eq2 the single forcing operator f is the `local_ops` cascade.
///
/// The diffusion term is stepped in level-set form,
/// D(|grad I|) * sqrt(|grad I|^2 + eps^2) * kappa, i.e. mean-curvature flow
/// slowed at edges. Without the gradient weight the explicit update is
/// unstable wherever |grad I| is small, for any usable dt.
enum class PdeModel { Eq2, Eq3 };

/// Residual subtracts I from the f_g / f forcing (bounded fidelity form);
/// Faithful adds the raw operator output.
enum class TermMode { Faithful, Residual };

struct PdeConfig {
    PdeModel model = PdeModel::Eq3;
    double lambda_diff = 0.1;
    double lambda_local = 0.5;
    double lambda_global = 0.5;
    double lambda_colour = 0.02;
    double lambda_f = 0.0;
    double dt = 0.1;
    int max_iters = 20;
    double tol = 1e-4;
    double pm_K = 0.1;
    double eps = 1e-4;
    double sigma_min = 1e-3;
    TermMode term_mode = TermMode::Residual;
    std::vector<OperatorSpec> local_ops{ClaheParams{}};
    std::vector<OperatorSpec> global_ops{GocParams{2, 1.0}};

    /// Parameter sanity (signs, finiteness, model/gain consistency).
    void validate() const;
    friend bool operator==(const PdeConfig&, const PdeConfig&) = default;
};

/// Diffusion: dt * lambda_diff <= 0.25.
/// Forcing: dt * (lambda_local + lambda_global + lambda_f + lambda_colour / sigma_est) <= 1,
/// sigma_est being the smallest non-zero channel std of `buf`, floored at sigma_min.
/// Throws StabilityBudgetExceeded.
void check_stability(const PdeConfig& cfg, const ImageBuffer& buf);

/// The image-independent part of check_stability (colour gain left out).
void check_gain_budget(const PdeConfig& cfg);

struct Field {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    double operator()(int x, int y) const noexcept {
        return values[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
};

/// Level-set curvature div(grad I / |grad I|) by central differences with
/// replicate-edge padding, regularized by eps in the denominator.
Field curvature(std::span<const double> plane, int width, int height, double eps);
Field curvature(const ImageBuffer& buf, int channel, double eps);

/// Central-difference gradient magnitude, replicate edges.
Field gradient_magnitude(std::span<const double> plane, int width, int height);

/// Perona-Malik rational diffusivity 1 / (1 + (s/K)^2).
double diffusivity(double grad_mag, double pm_K);

enum class CentralStatistic { Mean, Mode };

/// Per channel (v - centre) / max(sigma, sigma_min). Not clamped.
ImageBuffer colour_term(const ImageBuffer& buf, CentralStatistic centre, double sigma_min);

/// One explicit Euler update of every channel followed by clamp01.
ImageBuffer pde_step(const ImageBuffer& buf, const PdeConfig& cfg);

struct ChannelSnapshot {
    double mean = 0.0;
    double std = 0.0;
    double mode = 0.0;
};

struct TraceRecord {
    int iter = 0;
    double mean_abs_update = 0.0;
    double clamped_fraction = 0.0;
    std::vector<ChannelSnapshot> channels;
};

struct EvolutionTrace {
    std::vector<TraceRecord> records;

    std::size_t size() const noexcept { return records.size(); }
    void write_csv(std::ostream& os) const;
};

struct EvolveResult {
    ImageBuffer image;
    EvolutionTrace trace;
};

/// Iterates pde_step until the mean absolute update drops below tol or
/// max_iters steps have run.
EvolveResult evolve(const ImageBuffer& buf, const PdeConfig& cfg);

}  // namespace uwpde

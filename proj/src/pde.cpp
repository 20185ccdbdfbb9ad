#include "uwpde/pde.hpp"

#include "uwpde/analysis.hpp"
#include "uwpde/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace uwpde {

namespace {

constexpr double kDiffusionBudget = 0.25;
constexpr double kForcingBudget = 1.0;

struct Neighbourhood {
    int xm, xp, ym, yp;
};

inline Neighbourhood clamp_neighbours(int x, int y, int w, int h) {
    return {std::max(x - 1, 0), std::min(x + 1, w - 1), std::max(y - 1, 0), std::min(y + 1, h - 1)};
}

void require_non_negative(double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be finite and >= 0");
    }
}

void require_positive(double v, const char* name) {
    if (!std::isfinite(v) || !(v > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be finite and > 0");
    }
}

double plane_std(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    double sq = 0.0;
    double lo = v[0];
    double hi = v[0];
    for (double x : v) {
        sq += (x - mean) * (x - mean);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return lo == hi ? 0.0 : std::sqrt(sq / n);
}

// Per pixel: the diffusion increment D(|grad I|) * sqrt(|grad I|^2 + eps^2) * kappa.
template <typename Fn>
void for_each_stencil(std::span<const double> plane, int width, int height, Fn&& fn) {
    auto at = [&](int x, int y) { return plane[static_cast<std::size_t>(y) * width + x]; };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto n = clamp_neighbours(x, y, width, height);
            const double c = at(x, y);
            const double ix = 0.5 * (at(n.xp, y) - at(n.xm, y));
            const double iy = 0.5 * (at(x, n.yp) - at(x, n.ym));
            const double ixx = at(n.xp, y) - 2.0 * c + at(n.xm, y);
            const double iyy = at(x, n.yp) - 2.0 * c + at(x, n.ym);
            const double ixy = 0.25 * (at(n.xp, n.yp) - at(n.xp, n.ym) - at(n.xm, n.yp) + at(n.xm, n.ym));
            fn(static_cast<std::size_t>(y) * width + x, ix, iy, ixx, iyy, ixy);
        }
    }
}

std::vector<double> diffusion_increment(std::span<const double> plane, int width, int height,
                                        const PdeConfig& cfg) {
    std::vector<double> out(plane.size());
    const double eps2 = cfg.eps * cfg.eps;
    for_each_stencil(plane, width, height,
                     [&](std::size_t i, double ix, double iy, double ixx, double iyy, double ixy) {
                         const double g2 = ix * ix + iy * iy;
                         const double num = ixx * iy * iy - 2.0 * ix * iy * ixy + iyy * ix * ix;
                         // level-set form: kappa * |grad I|_eps = num / |grad I|_eps^2
                         out[i] = diffusivity(std::sqrt(g2), cfg.pm_K) * num / (g2 + eps2);
                     });
    return out;
}

struct StepOutcome {
    ImageBuffer image;
    std::size_t clamped = 0;
};

StepOutcome step_impl(const ImageBuffer& buf, const PdeConfig& cfg) {
    const bool residual = cfg.term_mode == TermMode::Residual;
    const bool eq3 = cfg.model == PdeModel::Eq3;
    const double b_diff = cfg.dt * cfg.lambda_diff;
    const double b_local = eq3 ? cfg.dt * cfg.lambda_local : 0.0;
    const double b_global = eq3 ? cfg.dt * cfg.lambda_global : 0.0;
    const double b_raw = eq3 ? 0.0 : cfg.dt * cfg.lambda_f;
    const double b_colour = cfg.dt * cfg.lambda_colour;

    // I_new = a*I + sum_k b_k * T_k, the fidelity subtractions folded into a.
    // Keeps dt * lambda = 1 telescoping to the operator output exactly.
    double self_weight = b_local;
    if (residual) self_weight += b_global + b_raw;
    const double a = 1.0 - self_weight;

    ImageBuffer local_out;
    ImageBuffer global_out;
    ImageBuffer raw_out;
    ImageBuffer colour;
    if (b_local != 0.0) local_out = cascade(buf, cfg.local_ops);
    if (b_global != 0.0) global_out = cascade(buf, cfg.global_ops);
    if (b_raw != 0.0) raw_out = cascade(buf, cfg.local_ops);
    if (b_colour != 0.0) {
        colour = colour_term(buf, eq3 ? CentralStatistic::Mean : CentralStatistic::Mode, cfg.sigma_min);
    }

    const int w = buf.width();
    const int h = buf.height();
    StepOutcome outcome{ImageBuffer(w, h, buf.channels()), 0};
    for (int c = 0; c < buf.channels(); ++c) {
        auto src = buf.plane(c);
        auto dst = outcome.image.plane(c);
        auto plane_or_empty = [c](const ImageBuffer& b) {
            return b.empty() ? std::span<const double>{} : b.plane(c);
        };
        const auto f_local = plane_or_empty(local_out);
        const auto f_global = plane_or_empty(global_out);
        const auto f_raw = plane_or_empty(raw_out);
        const auto f_colour = plane_or_empty(colour);
        std::vector<double> diff;
        if (b_diff != 0.0) diff = diffusion_increment(src, w, h, cfg);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            double v = a * src[i];
            // level-set form; the bare kappa update is unstable wherever the
            // gradient is near eps
            if (b_diff != 0.0) v += b_diff * diff[i];
            if (b_local != 0.0) v += b_local * f_local[i];
            if (b_global != 0.0) v += b_global * f_global[i];
            if (b_raw != 0.0) v += b_raw * f_raw[i];
            if (b_colour != 0.0) v += b_colour * f_colour[i];
            if (!std::isfinite(v)) {
                throw Error(ErrorCode::InvalidBufferState, "pde_step produced a non-finite value");
            }
            if (v < 0.0 || v > 1.0) {
                ++outcome.clamped;
                v = std::min(1.0, std::max(0.0, v));
            }
            dst[i] = v;
        }
    }
    return outcome;
}

}  // namespace

void PdeConfig::validate() const {
    require_non_negative(lambda_diff, "lambda_diff");
    require_non_negative(lambda_local, "lambda_local");
    require_non_negative(lambda_global, "lambda_global");
    require_non_negative(lambda_colour, "lambda_colour");
    require_non_negative(lambda_f, "lambda_f");
    require_positive(dt, "dt");
    require_positive(pm_K, "pm_K");
    require_positive(eps, "eps");
    require_positive(sigma_min, "sigma_min");
    require_non_negative(tol, "tol");
    if (max_iters < 1) {
        throw Error(ErrorCode::InvalidParameter, "max_iters must be >= 1");
    }
    if (model == PdeModel::Eq2 && (lambda_local != 0.0 || lambda_global != 0.0)) {
        throw Error(ErrorCode::InvalidConfig,
                    "eq2 uses lambda_f for its single forcing term; lambda_local and lambda_global must be 0");
    }
    if (model == PdeModel::Eq3 && lambda_f != 0.0) {
        throw Error(ErrorCode::InvalidConfig, "eq3 has no raw forcing term; lambda_f must be 0");
    }
}

void check_gain_budget(const PdeConfig& cfg) {
    cfg.validate();
    const double diffusion = cfg.dt * cfg.lambda_diff;
    if (diffusion > kDiffusionBudget) {
        throw Error(ErrorCode::StabilityBudgetExceeded,
                    "dt * lambda_diff = " + format_real(diffusion) + " exceeds " +
                        format_real(kDiffusionBudget));
    }
    const double forcing = cfg.dt * (cfg.lambda_local + cfg.lambda_global + cfg.lambda_f);
    if (forcing > kForcingBudget) {
        throw Error(ErrorCode::StabilityBudgetExceeded,
                    "forcing budget dt * (sum of gains) = " + format_real(forcing) + " exceeds 1");
    }
}

void check_stability(const PdeConfig& cfg, const ImageBuffer& buf) {
    check_gain_budget(cfg);
    double colour_gain = 0.0;
    if (cfg.lambda_colour != 0.0) {
        double sigma_est = std::numeric_limits<double>::infinity();
        for (int c = 0; c < buf.channels(); ++c) {
            const double s = plane_std(buf.plane(c));
            if (s > 0.0) sigma_est = std::min(sigma_est, std::max(s, cfg.sigma_min));
        }
        // All channels constant: the colour term is identically zero.
        if (std::isfinite(sigma_est)) colour_gain = cfg.lambda_colour / sigma_est;
    }
    const double forcing =
        cfg.dt * (cfg.lambda_local + cfg.lambda_global + cfg.lambda_f + colour_gain);
    if (forcing > kForcingBudget) {
        throw Error(ErrorCode::StabilityBudgetExceeded,
                    "forcing budget dt * (sum of gains) = " + format_real(forcing) + " exceeds 1");
    }
}

Field gradient_magnitude(std::span<const double> plane, int width, int height) {
    Field g{width, height, std::vector<double>(plane.size())};
    auto at = [&](int x, int y) { return plane[static_cast<std::size_t>(y) * width + x]; };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto n = clamp_neighbours(x, y, width, height);
            const double ix = 0.5 * (at(n.xp, y) - at(n.xm, y));
            const double iy = 0.5 * (at(x, n.yp) - at(x, n.ym));
            g.values[static_cast<std::size_t>(y) * width + x] = std::sqrt(ix * ix + iy * iy);
        }
    }
    return g;
}

Field curvature(std::span<const double> plane, int width, int height, double eps) {
    if (plane.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::InvalidBufferState, "curvature: plane size does not match dimensions");
    }
    Field k{width, height, std::vector<double>(plane.size())};
    const double eps2 = eps * eps;
    for_each_stencil(plane, width, height,
                     [&](std::size_t i, double ix, double iy, double ixx, double iyy, double ixy) {
                         const double num = ixx * iy * iy - 2.0 * ix * iy * ixy + iyy * ix * ix;
                         const double d = ix * ix + iy * iy + eps2;
                         k.values[i] = num / (d * std::sqrt(d));
                     });
    return k;
}

Field curvature(const ImageBuffer& buf, int channel, double eps) {
    return curvature(buf.plane(channel), buf.width(), buf.height(), eps);
}

double diffusivity(double grad_mag, double pm_K) {
    const double r = grad_mag / pm_K;
    return 1.0 / (1.0 + r * r);
}

ImageBuffer colour_term(const ImageBuffer& buf, CentralStatistic centre, double sigma_min) {
    require_finite(buf, "colour_term");
    ImageBuffer out(buf.width(), buf.height(), buf.channels());
    for (int c = 0; c < buf.channels(); ++c) {
        const ChannelStats s = channel_stats(buf, c);
        const double m = centre == CentralStatistic::Mean ? s.mean : s.mode;
        const double scale = std::max(s.std, sigma_min);
        auto src = buf.plane(c);
        auto dst = out.plane(c);
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = (src[i] - m) / scale;
        }
    }
    return out;
}

ImageBuffer pde_step(const ImageBuffer& buf, const PdeConfig& cfg) {
    require_finite(buf, "pde_step");
    check_stability(cfg, buf);
    return step_impl(buf, cfg).image;
}

EvolveResult evolve(const ImageBuffer& buf, const PdeConfig& cfg) {
    require_finite(buf, "evolve");
    EvolveResult result{buf, {}};
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        check_stability(cfg, result.image);
        StepOutcome next = step_impl(result.image, cfg);

        TraceRecord rec;
        rec.iter = iter;
        double total = 0.0;
        auto before = result.image.values();
        auto after = next.image.values();
        for (std::size_t i = 0; i < after.size(); ++i) {
            total += std::abs(after[i] - before[i]);
        }
        rec.mean_abs_update = total / static_cast<double>(after.size());
        rec.clamped_fraction = static_cast<double>(next.clamped) / static_cast<double>(after.size());
        for (int c = 0; c < next.image.channels(); ++c) {
            const ChannelStats s = channel_stats(next.image, c);
            rec.channels.push_back({s.mean, s.std, s.mode});
        }
        result.image = std::move(next.image);
        result.trace.records.push_back(std::move(rec));
        if (result.trace.records.back().mean_abs_update < cfg.tol) {
            break;
        }
    }
    return result;
}

void EvolutionTrace::write_csv(std::ostream& os) const {
    const std::size_t channels = records.empty() ? 0 : records.front().channels.size();
    os << "iter,mean_abs_update,clamped_fraction";
    for (std::size_t c = 0; c < channels; ++c) {
        os << ",ch" << c << "_mean,ch" << c << "_std,ch" << c << "_mode";
    }
    os << '\n';
    for (const TraceRecord& r : records) {
        os << r.iter << ',' << format_real(r.mean_abs_update) << ',' << format_real(r.clamped_fraction);
        for (const ChannelSnapshot& s : r.channels) {
            os << ',' << format_real(s.mean) << ',' << format_real(s.std) << ',' << format_real(s.mode);
        }
        os << '\n';
    }
}

}  // namespace uwpde

#include "uwpde/colour.hpp"
#include "uwpde/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numeric>

namespace uwpde {

namespace {

// FFTW's planner is not thread-safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <class T>
struct FftwFree {
    void operator()(T* p) const noexcept { fftw_free(p); }
};

template <class T>
using FftwArray = std::unique_ptr<T[], FftwFree<T>>;

struct PlanDeleter {
    void operator()(fftw_plan_s* plan) const noexcept {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

/// Filters one log-domain plane of size rows x cols (both even).
void filter_plane(std::vector<double>& plane, int rows, int cols, const HomomorphicParams& p) {
    const int spectrum_cols = cols / 2 + 1;
    const auto n_real = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    const auto n_complex = static_cast<std::size_t>(rows) * static_cast<std::size_t>(spectrum_cols);
    FftwArray<double> real(static_cast<double*>(fftw_malloc(sizeof(double) * n_real)));
    FftwArray<fftw_complex> spectrum(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_complex)));
    if (!real || !spectrum) {
        throw std::bad_alloc();
    }
    Plan forward;
    Plan inverse;
    {
        std::lock_guard lock(planner_mutex());
        forward.reset(fftw_plan_dft_r2c_2d(rows, cols, real.get(), spectrum.get(), FFTW_ESTIMATE));
        inverse.reset(fftw_plan_dft_c2r_2d(rows, cols, spectrum.get(), real.get(), FFTW_ESTIMATE));
    }
    std::copy(plane.begin(), plane.end(), real.get());
    fftw_execute(forward.get());

    for (int r = 0; r < rows; ++r) {
        const double fv = static_cast<double>(r <= rows / 2 ? r : r - rows) / rows;
        for (int c = 0; c < spectrum_cols; ++c) {
            const double fu = static_cast<double>(c) / cols;
            const double gain = homomorphic_transfer(std::sqrt(fu * fu + fv * fv), p);
            fftw_complex& z = spectrum[static_cast<std::size_t>(r) * spectrum_cols + c];
            z[0] *= gain;
            z[1] *= gain;
        }
    }
    fftw_execute(inverse.get());
    const double norm = 1.0 / static_cast<double>(n_real);
    for (std::size_t i = 0; i < n_real; ++i) {
        plane[i] = real[i] * norm;
    }
}

}  // namespace

void HomomorphicParams::validate() const {
    if (!(gamma_low > 0.0) || !(gamma_high >= gamma_low) || !std::isfinite(gamma_high)) {
        throw Error(ErrorCode::InvalidParameter, "homomorphic gains need gamma_high >= gamma_low > 0");
    }
    if (!(log_floor > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "homomorphic log_floor must be positive");
    }
    if (!(cutoff_frac > 0.0) || !(sharpness_c > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "homomorphic cutoff and sharpness must be positive");
    }
    if (!(fuzzy_slope > 0.0) || !std::isfinite(fuzzy_slope) ||
        (fuzzy_center && !std::isfinite(*fuzzy_center))) {
        throw Error(ErrorCode::InvalidParameter, "fuzzy membership parameters must be finite");
    }
}

double homomorphic_transfer(double radius, const HomomorphicParams& p) {
    // D / D0 with D = min(w,h) * radius and D0 = cutoff_frac * min(w,h).
    const double ratio = radius / p.cutoff_frac;
    return p.gamma_low +
           (p.gamma_high - p.gamma_low) * (1.0 - std::exp(-p.sharpness_c * ratio * ratio));
}

ImageBuffer fuzzy_homomorphic(const ImageBuffer& buf, const HomomorphicParams& p) {
    p.validate();
    require_finite(buf, "fuzzy_homomorphic");
    const int w = buf.width();
    const int h = buf.height();
    const int cols = w + (w % 2);
    const int rows = h + (h % 2);
    const double floor = p.log_floor;

    ImageBuffer out(w, h, buf.channels());
    std::vector<double> padded(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int c = 0; c < buf.channels(); ++c) {
        for (int y = 0; y < rows; ++y) {
            const int sy = std::min(y, h - 1);
            for (int x = 0; x < cols; ++x) {
                const int sx = std::min(x, w - 1);
                padded[static_cast<std::size_t>(y) * cols + x] =
                    std::log(std::max(0.0, buf(sx, sy, c)) + floor);
            }
        }
        filter_plane(padded, rows, cols, p);

        auto dst = out.plane(c);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                dst[static_cast<std::size_t>(y) * w + x] =
                    std::exp(padded[static_cast<std::size_t>(y) * cols + x]) - floor;
            }
        }

        if (p.fuzzy_enabled) {
            const auto [mn, mx] = std::minmax_element(dst.begin(), dst.end());
            const double center =
                p.fuzzy_center.value_or(std::accumulate(dst.begin(), dst.end(), 0.0) /
                                        static_cast<double>(dst.size()));
            auto membership = [&](double v) { return 1.0 / (1.0 + std::exp(-p.fuzzy_slope * (v - center))); };
            const double s_lo = membership(*mn);
            const double s_hi = membership(*mx);
            if (s_hi - s_lo > 1e-12) {
                for (double& v : dst) v = (membership(v) - s_lo) / (s_hi - s_lo);
            }
        }
        for (double& v : dst) v = std::min(1.0, std::max(0.0, v));
    }
    return out;
}

}  // namespace uwpde

#include "anett/operators.hpp"

#include "anett/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

namespace anett {

namespace {

// fftw planning is not thread safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Frequency response of the band-limited ramp: FFT of the discrete Ram-Lak
// kernel h[0] = 1/(4 ds^2), h[n odd] = -1/(n pi ds)^2, wrapped to length P.
// Using the spatial kernel avoids the DC offset of a sampled |nu|.
std::vector<double> ramp_response(int padded, double ds, FbpFilter filter) {
    std::vector<double> kernel(padded, 0.0);
    kernel[0] = 1.0 / (4.0 * ds * ds);
    for (int n = 1; n < padded / 2; ++n) {
        if (n % 2 == 1) {
            const double v = -1.0 / (n * n * std::numbers::pi * std::numbers::pi * ds * ds);
            kernel[n] = v;
            kernel[padded - n] = v;
        }
    }
    const int bins = padded / 2 + 1;
    std::vector<std::complex<double>> spectrum(bins);
    {
        std::lock_guard lock(planner_mutex());
        fftw_plan plan = fftw_plan_dft_r2c_1d(padded, kernel.data(),
                                              reinterpret_cast<fftw_complex*>(spectrum.data()), FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    std::vector<double> response(bins);
    for (int b = 0; b < bins; ++b) {
        double r = spectrum[b].real();
        if (filter == FbpFilter::hann) {
            const double f = static_cast<double>(b) / padded;  // cycles per sample, in [0, 1/2]
            r *= 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * f));
        }
        response[b] = r;
    }
    return response;
}

} // namespace

Vector ramp_filter_rows(const Vector& y, const ScanGeometry& geom, FbpFilter filter) {
    detail::require_same_size(y.size(), geom.size(), "ramp_filter_rows");
    const int ns = geom.n_detectors;
    const int padded = next_pow2(2 * ns);
    const int bins = padded / 2 + 1;
    const double ds = geom.detector_spacing();
    const std::vector<double> response = ramp_response(padded, ds, filter);

    std::vector<double> row(padded);
    std::vector<std::complex<double>> spectrum(bins);
    fftw_plan forward;
    fftw_plan backward;
    {
        std::lock_guard lock(planner_mutex());
        auto* spec = reinterpret_cast<fftw_complex*>(spectrum.data());
        forward = fftw_plan_dft_r2c_1d(padded, row.data(), spec, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(padded, spec, row.data(), FFTW_ESTIMATE);
    }

    Vector out(y.size());
    // Convolution sum ds * sum_n h[n] p[j-n]; fftw's inverse is unnormalized.
    const double scale = ds / padded;
    for (int k = 0; k < geom.n_angles; ++k) {
        std::fill(row.begin(), row.end(), 0.0);
        for (int j = 0; j < ns; ++j) row[j] = y[static_cast<Eigen::Index>(k) * ns + j];
        fftw_execute(forward);
        for (int b = 0; b < bins; ++b) spectrum[b] *= response[b];
        fftw_execute(backward);
        for (int j = 0; j < ns; ++j) out[static_cast<Eigen::Index>(k) * ns + j] = row[j] * scale;
    }

    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    return out;
}

Image fbp(const Sinogram& sino, int image_size, FbpFilter filter) {
    const ScanGeometry& geom = sino.geometry;
    if (geom.n_angles < 2) {
        throw DomainError("fbp: need at least two angles");
    }
    const Vector filtered = ramp_filter_rows(sino.values, geom, filter);
    const RadonOperator op(image_size, geom, filter);
    const double h = 2.0 / image_size;
    // The transpose spreads each detector value over a footprint of area h^2
    // per detector cell ds; undo that before the angular quadrature pi / N_phi.
    const double scale = std::numbers::pi / geom.n_angles * geom.detector_spacing() / (h * h);
    return Image(image_size, scale * op.apply_adjoint(filtered));
}

} // namespace anett

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vitals {

// Uniformly sampled multi-channel time series. Channel 0 is red when the
// signal came from a camera; single-channel signals (BIDMC PLETH) have one
// entry in `samples`.
struct Signal {
    double sample_rate_hz = 0.0;
    std::vector<std::vector<double>> samples;  // per channel, equal lengths

    int channels() const { return static_cast<int>(samples.size()); }
    std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }

    // Enforces the type invariants: equal channel lengths, positive rate,
    // finite values. Throws InvalidInput.
    void validate() const;
};

// 8-bit RGB camera frame, row-major.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // 3 bytes per pixel, r g b

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Fixed-length slice of a Signal, channel-major values.
struct Window {
    double t_start_s = 0.0;
    int channels = 0;
    int length = 0;
    std::vector<double> values;  // channels * length

    double at(int c, int t) const { return values[static_cast<std::size_t>(c) * length + t]; }
};

// DCT coefficient band for heart-rate-range filtering. Coefficient k of a
// length-N transform at sample rate fs sits at frequency k*fs/(2N).
struct BandMask {
    double low_hz = 0.0;
    double high_hz = 0.0;
    bool keep_dc = false;
    int k_lo = 0;
    int k_hi = 0;

    int kept_count() const { return (k_hi - k_lo + 1) + (keep_dc ? 1 : 0); }
};

// Per-plane arithmetic means of a frame, each in [0, 255]. Pixel sums are
// integer, so the result carries no accumulation-order noise.
std::array<double, 3> mean_rgb(const Frame& frame);

// Zero mean, unit population standard deviation. Inputs with std below 1e-8
// map to all zeros (covered-camera frames must not crash inference).
// Requires length >= 2.
std::vector<double> standardize(const std::vector<double>& x);

// Slices `s` into fixed windows of `window_s` seconds every `hop_s` seconds.
// window_s*fs and hop_s*fs must be whole sample counts. A signal shorter than
// one window yields an empty list.
std::vector<Window> make_windows(const Signal& s, double window_s, double hop_s);

// Linear-interpolation resampling onto a grid of round(duration*target_hz)+1
// samples spanning the same duration; endpoints clamped.
Signal resample_linear(const Signal& s, double target_hz);

// Orthonormal DCT-II: X_k = s_k * sum_n x_n cos(pi(2n+1)k/(2N)),
// s_0 = sqrt(1/N), s_k = sqrt(2/N) otherwise. Parseval holds exactly in
// infinite precision; tests enforce 1e-9.
std::vector<double> dct2_forward(const std::vector<double>& x);

// Matching DCT-III inverse; inverse(forward(x)) == x to 1e-9.
std::vector<double> dct2_inverse(const std::vector<double>& X);

// Smallest k with k*fs/(2N) >= low_hz and largest k with k*fs/(2N) <= high_hz,
// both clamped into [1, N-1]. Throws InvalidInput when the band is outside the
// representable range or selects no coefficient.
std::pair<int, int> band_mask_indices(int n, double fs, double low_hz, double high_hz);

// band_mask_indices plus the DC policy, packaged for model construction.
BandMask make_band_mask(int n, double fs, double low_hz, double high_hz, bool keep_dc);

// Coefficients selected by the mask, cropped (not zero-filled): optionally
// X_0, then X_{k_lo}..X_{k_hi}.
std::vector<double> apply_band_crop(const std::vector<double>& coeffs, const BandMask& mask);

// --- file formats ------------------------------------------------------

// Binary PPM (P6, maxval 255). Throws ParseError naming the file.
Frame read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Frame& frame);

// Plain-text signal CSV: header "idx,r,g,b" (3 channels) or "idx,v" (1).
// The sample rate is not stored in the file; callers supply it (30 Hz is the
// project-wide camera convention).
Signal read_signal_csv(const std::string& path, double sample_rate_hz);
void write_signal_csv(const std::string& path, const Signal& s);

}  // namespace vitals

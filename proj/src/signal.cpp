#include "vitals/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include "vitals/errors.hpp"
#include "vitals/io_util.hpp"
#include "vitals/rng.hpp"

namespace vitals {

void Signal::validate() const {
    if (sample_rate_hz <= 0.0) throw InvalidInput("signal sample rate must be positive");
    if (channels() != 1 && channels() != 3) {
        throw InvalidInput("signal must have 1 or 3 channels, got " + std::to_string(channels()));
    }
    std::size_t len = samples[0].size();
    for (const auto& ch : samples) {
        if (ch.size() != len) throw InvalidInput("signal channels differ in length");
        for (double v : ch) {
            if (!std::isfinite(v)) throw InvalidInput("signal contains non-finite value");
        }
    }
}

std::array<double, 3> mean_rgb(const Frame& frame) {
    std::size_t n = frame.pixel_count();
    if (n == 0 || frame.pixels.size() != n * 3) throw InvalidInput("empty or inconsistent frame");
    std::uint64_t sums[3] = {0, 0, 0};
    for (std::size_t p = 0; p < n; ++p) {
        sums[0] += frame.pixels[p * 3];
        sums[1] += frame.pixels[p * 3 + 1];
        sums[2] += frame.pixels[p * 3 + 2];
    }
    double d = static_cast<double>(n);
    return {static_cast<double>(sums[0]) / d, static_cast<double>(sums[1]) / d,
            static_cast<double>(sums[2]) / d};
}

std::vector<double> standardize(const std::vector<double>& x) {
    std::size_t n = x.size();
    if (n < 2) throw InvalidInput("standardize needs at least 2 samples");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    double sd = std::sqrt(var);
    std::vector<double> out(n, 0.0);
    if (sd < 1e-8) return out;  // degenerate input maps to zeros
    for (std::size_t i = 0; i < n; ++i) out[i] = (x[i] - mean) / sd;
    return out;
}

namespace {

// Whole-sample count from a duration; rejects non-integral products.
long to_sample_count(double seconds, double fs, const char* what) {
    double raw = seconds * fs;
    double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-9 * std::max(1.0, std::abs(raw)) || rounded < 1.0) {
        throw InvalidInput(std::string(what) + " does not map to a whole positive sample count");
    }
    return static_cast<long>(rounded);
}

}  // namespace

std::vector<Window> make_windows(const Signal& s, double window_s, double hop_s) {
    s.validate();
    long n = to_sample_count(window_s, s.sample_rate_hz, "window length");
    long h = to_sample_count(hop_s, s.sample_rate_hz, "hop");
    long len = static_cast<long>(s.length());
    std::vector<Window> out;
    if (len < n) return out;  // shorter than one window: empty, not an error

    long count = (len - n) / h + 1;
    out.reserve(static_cast<std::size_t>(count));
    int ch = s.channels();
    for (long i = 0; i < count; ++i) {
        Window w;
        w.t_start_s = static_cast<double>(i) * hop_s;
        w.channels = ch;
        w.length = static_cast<int>(n);
        w.values.resize(static_cast<std::size_t>(ch) * n);
        long start = i * h;
        for (int c = 0; c < ch; ++c) {
            const auto& src = s.samples[c];
            std::copy(src.begin() + start, src.begin() + start + n,
                      w.values.begin() + static_cast<std::size_t>(c) * n);
        }
        out.push_back(std::move(w));
    }
    return out;
}

Signal resample_linear(const Signal& s, double target_hz) {
    s.validate();
    if (target_hz <= 0.0) throw InvalidInput("target rate must be positive");
    long len = static_cast<long>(s.length());
    Signal out;
    out.sample_rate_hz = target_hz;
    out.samples.resize(s.samples.size());
    if (len == 0) return out;

    // Output grid covers [0, (len-1)/fs]; the epsilon keeps exact fenceposts in.
    double duration = static_cast<double>(len - 1) / s.sample_rate_hz;
    long out_len = static_cast<long>(std::floor(duration * target_hz + 1e-9)) + 1;
    double step = s.sample_rate_hz / target_hz;  // source samples per output sample

    for (int c = 0; c < s.channels(); ++c) {
        const auto& src = s.samples[c];
        auto& dst = out.samples[c];
        dst.resize(static_cast<std::size_t>(out_len));
        for (long j = 0; j < out_len; ++j) {
            double pos = static_cast<double>(j) * step;
            long i0 = static_cast<long>(std::floor(pos));
            i0 = std::clamp(i0, 0L, len - 1);
            long i1 = std::min(i0 + 1, len - 1);
            double frac = pos - static_cast<double>(i0);
            frac = std::clamp(frac, 0.0, 1.0);
            dst[static_cast<std::size_t>(j)] = (1.0 - frac) * src[i0] + frac * src[i1];
        }
    }
    return out;
}

namespace {

// Cosine table cos(pi*(2n+1)*k/(2N)), row k. For N=300 this is 720 KB and it
// turns each transform into plain multiply-adds.
struct DctPlan {
    int n;
    std::vector<double> table;

    explicit DctPlan(int n_) : n(n_), table(static_cast<std::size_t>(n_) * n_) {
        for (int k = 0; k < n; ++k) {
            for (int i = 0; i < n; ++i) {
                table[static_cast<std::size_t>(k) * n + i] =
                    std::cos(kPi * (2.0 * i + 1.0) * k / (2.0 * n));
            }
        }
    }
};

const DctPlan& plan_for(int n) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<DctPlan>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<DctPlan>(n);
    return *slot;
}

}  // namespace

std::vector<double> dct2_forward(const std::vector<double>& x) {
    int n = static_cast<int>(x.size());
    if (n < 1) throw InvalidInput("dct2_forward needs at least one sample");
    const DctPlan& plan = plan_for(n);
    std::vector<double> out(static_cast<std::size_t>(n));
    double s0 = std::sqrt(1.0 / n);
    double sk = std::sqrt(2.0 / n);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        const double* row = plan.table.data() + static_cast<std::size_t>(k) * n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += x[i] * row[i];
        out[k] = acc * (k == 0 ? s0 : sk);
    }
    return out;
}

std::vector<double> dct2_inverse(const std::vector<double>& coeffs) {
    int n = static_cast<int>(coeffs.size());
    if (n < 1) throw InvalidInput("dct2_inverse needs at least one coefficient");
    const DctPlan& plan = plan_for(n);
    std::vector<double> out(static_cast<std::size_t>(n));
    double s0 = std::sqrt(1.0 / n);
    double sk = std::sqrt(2.0 / n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            double scaled = coeffs[k] * (k == 0 ? s0 : sk);
            acc += scaled * plan.table[static_cast<std::size_t>(k) * n + i];
        }
        out[i] = acc;
    }
    return out;
}

std::pair<int, int> band_mask_indices(int n, double fs, double low_hz, double high_hz) {
    if (n < 2 || fs <= 0.0) throw InvalidInput("band mask needs n >= 2 and positive sample rate");
    if (!(0.0 < low_hz && low_hz < high_hz && high_hz <= fs / 2.0)) {
        throw InvalidInput("band must satisfy 0 < low < high <= fs/2");
    }
    auto freq = [&](int k) { return static_cast<double>(k) * fs / (2.0 * n); };

    // ceil/floor of 2*N*f/fs, then nudged so the f_k bounds hold exactly in
    // the same arithmetic the caller will use.
    int k_lo = static_cast<int>(std::ceil(2.0 * n * low_hz / fs));
    while (k_lo > 1 && freq(k_lo - 1) >= low_hz) --k_lo;
    while (k_lo < n && freq(k_lo) < low_hz) ++k_lo;
    int k_hi = static_cast<int>(std::floor(2.0 * n * high_hz / fs));
    while (k_hi < n - 1 && freq(k_hi + 1) <= high_hz) ++k_hi;
    while (k_hi > 0 && freq(k_hi) > high_hz) --k_hi;

    k_lo = std::max(k_lo, 1);
    k_hi = std::min(k_hi, n - 1);
    if (k_lo > k_hi) throw InvalidInput("band selects no DCT coefficient");
    return {k_lo, k_hi};
}

BandMask make_band_mask(int n, double fs, double low_hz, double high_hz, bool keep_dc) {
    auto [k_lo, k_hi] = band_mask_indices(n, fs, low_hz, high_hz);
    BandMask m;
    m.low_hz = low_hz;
    m.high_hz = high_hz;
    m.keep_dc = keep_dc;
    m.k_lo = k_lo;
    m.k_hi = k_hi;
    return m;
}

std::vector<double> apply_band_crop(const std::vector<double>& coeffs, const BandMask& mask) {
    if (mask.k_hi >= static_cast<int>(coeffs.size()) || mask.k_lo < 1 || mask.k_lo > mask.k_hi) {
        throw InvalidInput("band mask out of range for coefficient vector");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(mask.kept_count()));
    if (mask.keep_dc) out.push_back(coeffs[0]);
    out.insert(out.end(), coeffs.begin() + mask.k_lo, coeffs.begin() + mask.k_hi + 1);
    return out;
}

// --- PPM ----------------------------------------------------------------

namespace {

// Next whitespace-delimited token, skipping '#' comment lines.
std::string ppm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

}  // namespace

Frame read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 1, "cannot open frame file");
    if (ppm_token(in) != "P6") throw ParseError(path, 1, "not a binary PPM (expected P6)");
    auto w = parse_int(ppm_token(in));
    auto h = parse_int(ppm_token(in));
    auto maxval = parse_int(ppm_token(in));
    if (!w || !h || *w <= 0 || *h <= 0) throw ParseError(path, 1, "bad PPM dimensions");
    if (!maxval || *maxval != 255) throw ParseError(path, 1, "PPM maxval must be 255");

    Frame f;
    f.width = static_cast<int>(*w);
    f.height = static_cast<int>(*h);
    f.pixels.resize(f.pixel_count() * 3);
    in.read(reinterpret_cast<char*>(f.pixels.data()),
            static_cast<std::streamsize>(f.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != f.pixels.size()) {
        throw ParseError(path, 1, "truncated PPM pixel data");
    }
    return f;
}

void write_ppm(const std::string& path, const Frame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path, 1, "cannot open frame file for writing");
    out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
}

// --- signal CSV ---------------------------------------------------------

Signal read_signal_csv(const std::string& path, double sample_rate_hz) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 1, "cannot open signal CSV");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path, 1, "empty signal CSV");
    auto header = split_csv(line);
    int channels;
    if (header.size() == 4 && header[0] == "idx" && header[1] == "r" && header[2] == "g" &&
        header[3] == "b") {
        channels = 3;
    } else if (header.size() == 2 && header[0] == "idx" && header[1] == "v") {
        channels = 1;
    } else {
        throw ParseError(path, 1, "header must be idx,r,g,b or idx,v");
    }

    Signal s;
    s.sample_rate_hz = sample_rate_hz;
    s.samples.resize(static_cast<std::size_t>(channels));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != static_cast<std::size_t>(channels) + 1) {
            throw ParseError(path, lineno, "expected " + std::to_string(channels + 1) + " columns");
        }
        if (!parse_int(cells[0])) throw ParseError(path, lineno, "bad sample index");
        for (int c = 0; c < channels; ++c) {
            auto v = parse_double(cells[static_cast<std::size_t>(c) + 1]);
            if (!v || !std::isfinite(*v)) throw ParseError(path, lineno, "bad sample value");
            s.samples[static_cast<std::size_t>(c)].push_back(*v);
        }
    }
    return s;
}

void write_signal_csv(const std::string& path, const Signal& s) {
    if (s.channels() != 1 && s.channels() != 3) {
        throw InvalidInput("signal CSV supports 1 or 3 channels");
    }
    std::ofstream out(path);
    if (!out) throw ParseError(path, 1, "cannot open signal CSV for writing");
    out << (s.channels() == 3 ? "idx,r,g,b\n" : "idx,v\n");
    for (std::size_t i = 0; i < s.length(); ++i) {
        out << i;
        for (int c = 0; c < s.channels(); ++c) {
            out << ',' << fmt_double(s.samples[static_cast<std::size_t>(c)][i]);
        }
        out << '\n';
    }
}

}  // namespace vitals

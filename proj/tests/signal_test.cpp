#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "vitals/errors.hpp"
#include "vitals/ref.hpp"
#include "vitals/rng.hpp"
#include "vitals/signal.hpp"

using namespace vitals;

namespace {

Frame constant_frame(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Frame f;
    f.width = w;
    f.height = h;
    f.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t p = 0; p < f.pixel_count(); ++p) {
        f.pixels[p * 3] = r;
        f.pixels[p * 3 + 1] = g;
        f.pixels[p * 3 + 2] = b;
    }
    return f;
}

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("mean_rgb on constant and two-point frames") {
    auto m = mean_rgb(constant_frame(2, 2, 10, 20, 30));
    CHECK(m[0] == 10.0);
    CHECK(m[1] == 20.0);
    CHECK(m[2] == 30.0);

    Frame two;
    two.width = 1;
    two.height = 2;
    two.pixels = {0, 0, 0, 255, 255, 255};
    auto m2 = mean_rgb(two);
    CHECK(m2[0] == 127.5);
    CHECK(m2[1] == 127.5);
    CHECK(m2[2] == 127.5);
}

TEST_CASE("mean_rgb matches the per-pixel oracle on a random frame") {
    SplitMix64 rng(11);
    Frame f;
    f.width = 8;
    f.height = 8;
    f.pixels.resize(8 * 8 * 3);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.next_below(256));
    auto fast = mean_rgb(f);
    auto oracle = ref::mean_rgb(f);
    for (int c = 0; c < 3; ++c) {
        CHECK(fast[c] == doctest::Approx(oracle[c]).epsilon(0.0));
        CHECK(fast[c] >= 0.0);
        CHECK(fast[c] <= 255.0);
    }
}

TEST_CASE("mean_rgb rejects an empty frame") {
    Frame f;
    CHECK_THROWS_AS(mean_rgb(f), InvalidInput);
}

TEST_CASE("standardize closed form, degenerate rule, recomputed statistics") {
    auto z = standardize({1.0, 2.0, 3.0});
    double expected = std::sqrt(1.5);  // 1/sqrt(2/3)
    CHECK(z[0] == doctest::Approx(-expected).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(z[2] == doctest::Approx(expected).epsilon(1e-12));

    auto flat = standardize({5.0, 5.0, 5.0, 5.0});
    for (double v : flat) CHECK(v == 0.0);

    SplitMix64 rng(5);
    std::vector<double> x(300);
    for (double& v : x) v = 3.0 + 10.0 * rng.next_symmetric(1.0);
    auto s = standardize(x);
    double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= s.size();
    CHECK(std::abs(mean) < 1e-9);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);

    CHECK_THROWS_AS(standardize({1.0}), InvalidInput);
}

TEST_CASE("standardize is idempotent on non-degenerate input") {
    SplitMix64 rng(9);
    std::vector<double> x(64);
    for (double& v : x) v = rng.next_symmetric(4.0) + 2.0;
    auto once = standardize(x);
    auto twice = standardize(once);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(once[i] - twice[i]) < 1e-9);
    }
}

namespace {

Signal ramp_signal(int channels, long n, double fs) {
    Signal s;
    s.sample_rate_hz = fs;
    s.samples.resize(static_cast<std::size_t>(channels));
    for (auto& ch : s.samples) {
        ch.resize(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) ch[static_cast<std::size_t>(i)] = static_cast<double>(i);
    }
    return s;
}

}  // namespace

TEST_CASE("make_windows counts and start times") {
    auto w1 = make_windows(ramp_signal(1, 300, 30.0), 10.0, 1.0);
    REQUIRE(w1.size() == 1);
    CHECK(w1[0].t_start_s == 0.0);

    auto w3 = make_windows(ramp_signal(1, 360, 30.0), 10.0, 1.0);
    REQUIRE(w3.size() == 3);
    CHECK(w3[0].t_start_s == 0.0);
    CHECK(w3[1].t_start_s == 1.0);
    CHECK(w3[2].t_start_s == 2.0);
    CHECK(w3[1].values[0] == 30.0);  // second window starts one hop in

    auto w471 = make_windows(ramp_signal(3, 14400, 30.0), 10.0, 1.0);
    CHECK(w471.size() == 471);
    CHECK(w471[0].channels == 3);

    CHECK(make_windows(ramp_signal(1, 200, 30.0), 10.0, 1.0).empty());
}

TEST_CASE("make_windows count matches the closed form over a parameter sweep") {
    for (long len : {300L, 301L, 512L, 999L}) {
        for (double hop : {1.0, 2.0, 5.0}) {
            auto ws = make_windows(ramp_signal(1, len, 30.0), 10.0, hop);
            long n = 300, h = static_cast<long>(hop * 30.0);
            CHECK(static_cast<long>(ws.size()) == (len - n) / h + 1);
        }
    }
}

TEST_CASE("resample_linear constants, midpoint, analytic ramp") {
    Signal c = ramp_signal(1, 50, 25.0);
    for (auto& v : c.samples[0]) v = 7.5;
    Signal rc = resample_linear(c, 10.0);
    CHECK(rc.sample_rate_hz == 10.0);
    for (double v : rc.samples[0]) CHECK(v == doctest::Approx(7.5).epsilon(1e-15));

    Signal two;
    two.sample_rate_hz = 1.0;
    two.samples = {{0.0, 1.0}};
    Signal mid = resample_linear(two, 2.0);
    REQUIRE(mid.samples[0].size() == 3);
    CHECK(mid.samples[0][0] == doctest::Approx(0.0));
    CHECK(mid.samples[0][1] == doctest::Approx(0.5));
    CHECK(mid.samples[0][2] == doctest::Approx(1.0));

    Signal ramp = ramp_signal(1, 1250, 125.0);  // value = 125*t
    Signal r30 = resample_linear(ramp, 30.0);
    for (std::size_t j = 0; j < r30.samples[0].size(); ++j) {
        double t = static_cast<double>(j) / 30.0;
        CHECK(std::abs(r30.samples[0][j] - 125.0 * t) < 1e-9);
    }
}

TEST_CASE("dct2 DC input, Parseval, basis vector") {
    std::vector<double> c(300, 2.5);
    auto coeffs = dct2_forward(c);
    CHECK(coeffs[0] == doctest::Approx(2.5 * std::sqrt(300.0)).epsilon(1e-12));
    for (std::size_t k = 1; k < coeffs.size(); ++k) CHECK(std::abs(coeffs[k]) < 1e-10);

    SplitMix64 rng(17);
    std::vector<double> x(300);
    for (double& v : x) v = rng.next_symmetric(2.0);
    auto X = dct2_forward(x);
    CHECK(std::abs(l2(X) - l2(x)) < 1e-9);

    // x_n = cos(pi(2n+1)*7/(2*300)) is the k=7 basis vector, amplitude sqrt(N/2)
    std::vector<double> basis(300);
    for (int n = 0; n < 300; ++n) {
        basis[static_cast<std::size_t>(n)] = std::cos(kPi * (2 * n + 1) * 7.0 / 600.0);
    }
    auto B = dct2_forward(basis);
    for (std::size_t k = 0; k < B.size(); ++k) {
        if (k == 7) {
            CHECK(B[k] == doctest::Approx(std::sqrt(150.0)).epsilon(1e-10));
        } else {
            CHECK(std::abs(B[k]) < 1e-9);
        }
    }
}

TEST_CASE("dct2 linearity") {
    SplitMix64 rng(23);
    std::vector<double> x(128), y(128), combo(128);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = rng.next_symmetric(1.0);
        y[i] = rng.next_symmetric(1.0);
        combo[i] = 2.0 * x[i] - 0.5 * y[i];
    }
    auto X = dct2_forward(x), Y = dct2_forward(y), C = dct2_forward(combo);
    for (std::size_t k = 0; k < C.size(); ++k) {
        CHECK(std::abs(C[k] - (2.0 * X[k] - 0.5 * Y[k])) < 1e-9);
    }
}

TEST_CASE("dct2 inverse round trip and special coefficient vectors") {
    SplitMix64 rng(29);
    std::vector<double> x(300);
    for (double& v : x) v = rng.next_symmetric(3.0);
    auto back = dct2_inverse(dct2_forward(x));
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-9);

    std::vector<double> dc(64, 0.0);
    dc[0] = std::sqrt(64.0);
    for (double v : dct2_inverse(dc)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> zeros(64, 0.0);
    for (double v : dct2_inverse(zeros)) CHECK(v == 0.0);
}

TEST_CASE("dct2 matches the serial reference") {
    SplitMix64 rng(31);
    std::vector<double> x(300);
    for (double& v : x) v = rng.next_symmetric(2.0);
    auto a = dct2_forward(x);
    auto b = ref::dct2_forward(x);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
    auto ia = dct2_inverse(a);
    auto ib = ref::dct2_inverse(a);
    for (std::size_t i = 0; i < ia.size(); ++i) CHECK(std::abs(ia[i] - ib[i]) < 1e-12);
}

TEST_CASE("band_mask_indices paper band, boundary band, 125 Hz case") {
    auto [lo, hi] = band_mask_indices(300, 30.0, 0.7, 4.0);
    CHECK(lo == 14);
    CHECK(hi == 80);
    // exact bin frequencies
    CHECK(14.0 * 30.0 / 600.0 == 0.7);
    CHECK(80.0 * 30.0 / 600.0 == 4.0);

    auto [lo2, hi2] = band_mask_indices(1000, 125.0, 0.7, 4.0);
    CHECK(lo2 == 12);
    CHECK(hi2 == 64);

    // a band squeezed between two bins selects nothing
    CHECK_THROWS_AS(band_mask_indices(300, 30.0, 0.051, 0.052), InvalidInput);
    CHECK_THROWS_AS(band_mask_indices(300, 30.0, 4.0, 0.7), InvalidInput);
    CHECK_THROWS_AS(band_mask_indices(300, 30.0, 0.7, 16.0), InvalidInput);
}

TEST_CASE("band mask frequencies bracket the requested band") {
    SplitMix64 rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 50 + static_cast<int>(rng.next_below(500));
        double fs = 10.0 + rng.next_unit() * 120.0;
        double lo_hz = 0.05 + rng.next_unit() * fs / 4.0;
        double hi_hz = lo_hz + 0.2 + rng.next_unit() * (fs / 2.0 - lo_hz - 0.2);
        if (hi_hz > fs / 2.0 || lo_hz >= hi_hz) continue;
        int k_lo, k_hi;
        try {
            std::tie(k_lo, k_hi) = band_mask_indices(n, fs, lo_hz, hi_hz);
        } catch (const InvalidInput&) {
            continue;  // empty band is a legal rejection
        }
        CHECK(k_lo >= 1);
        CHECK(k_hi <= n - 1);
        CHECK(k_lo * fs / (2.0 * n) >= lo_hz);
        CHECK(k_hi * fs / (2.0 * n) <= hi_hz);
    }
}

TEST_CASE("apply_band_crop lengths and DC policy") {
    BandMask m = make_band_mask(300, 30.0, 0.7, 4.0, false);
    CHECK(m.kept_count() == 67);
    std::vector<double> coeffs(300);
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = static_cast<double>(i);
    auto cropped = apply_band_crop(coeffs, m);
    REQUIRE(cropped.size() == 67);
    CHECK(cropped.front() == 14.0);
    CHECK(cropped.back() == 80.0);

    BandMask with_dc = make_band_mask(300, 30.0, 0.7, 4.0, true);
    auto kept = apply_band_crop(coeffs, with_dc);
    REQUIRE(kept.size() == 68);
    CHECK(kept.front() == 0.0);
    CHECK(kept[1] == 14.0);
}

TEST_CASE("ppm round trip and malformed files") {
    testutil::TempDir dir;
    Frame f = constant_frame(3, 2, 9, 90, 200);
    f.pixels[4] = 77;  // non-constant content
    write_ppm(dir.file("a.ppm"), f);
    Frame g = read_ppm(dir.file("a.ppm"));
    CHECK(g.width == 3);
    CHECK(g.height == 2);
    CHECK(g.pixels == f.pixels);

    testutil::write_file(dir.file("bad.ppm"), "P5\n2 2\n255\nxxxx");
    CHECK_THROWS_AS(read_ppm(dir.file("bad.ppm")), ParseError);
    testutil::write_file(dir.file("trunc.ppm"), "P6\n4 4\n255\nabc");
    CHECK_THROWS_AS(read_ppm(dir.file("trunc.ppm")), ParseError);
}

TEST_CASE("signal CSV round trip, both channel layouts") {
    testutil::TempDir dir;
    Signal s;
    s.sample_rate_hz = 30.0;
    s.samples = {{1.5, 2.25, 3.125}, {0.0, -1.0, 0.5}, {10.0, 20.0, 30.0}};
    write_signal_csv(dir.file("rgb.csv"), s);
    Signal r = read_signal_csv(dir.file("rgb.csv"), 30.0);
    CHECK(r.channels() == 3);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(r.samples[static_cast<std::size_t>(c)][i] ==
                  s.samples[static_cast<std::size_t>(c)][i]);
        }
    }

    Signal mono;
    mono.sample_rate_hz = 30.0;
    mono.samples = {{0.125, -3.5}};
    write_signal_csv(dir.file("mono.csv"), mono);
    CHECK(read_signal_csv(dir.file("mono.csv"), 30.0).channels() == 1);

    testutil::write_file(dir.file("bad.csv"), "idx,r,g,b\n0,1,2\n");
    CHECK_THROWS_AS(read_signal_csv(dir.file("bad.csv"), 30.0), ParseError);
}

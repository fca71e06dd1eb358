#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "auricle/errors.hpp"
#include "auricle/gradcheck.hpp"
#include "auricle/layers.hpp"
#include "auricle/rng.hpp"
#include "auricle/tensor.hpp"

using namespace auricle;
using T = TensorOf<double>;

namespace {

T random_tensor(std::vector<std::int64_t> shape, std::uint64_t seed, double lo = -1.0,
                double hi = 1.0) {
    T t(std::move(shape));
    Rng rng(seed);
    for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Random values kept away from zero so relu stays differentiable at the
// finite-difference step, and staggered so pooling argmaxes cannot flip.
T staggered_tensor(std::vector<std::int64_t> shape, std::uint64_t seed) {
    T t = random_tensor(std::move(shape), seed);
    for (std::int64_t i = 0; i < t.numel(); ++i) {
        if (std::fabs(t[i]) < 0.05) t[i] = t[i] < 0 ? -0.05 : 0.05;
        t[i] += 1e-3 * static_cast<double>(i % 97);
    }
    return t;
}

double weighted_sum(const T& y, const T& weights) {
    REQUIRE(y.same_shape(weights));
    double acc = 0.0;
    for (std::int64_t i = 0; i < y.numel(); ++i) acc += y[i] * weights[i];
    return acc;
}

// Direct seven-loop convolution, the shape the fast path must agree with.
T naive_conv3x3(const T& x, const T& w, const T& b) {
    const std::int64_t bsz = x.dim(0), c_in = x.dim(1), h = x.dim(2), wd = x.dim(3);
    const std::int64_t c_out = w.dim(0);
    T y({bsz, c_out, h, wd});
    for (std::int64_t s = 0; s < bsz; ++s) {
        for (std::int64_t o = 0; o < c_out; ++o) {
            for (std::int64_t yy = 0; yy < h; ++yy) {
                for (std::int64_t xx = 0; xx < wd; ++xx) {
                    double acc = b[o];
                    for (std::int64_t c = 0; c < c_in; ++c) {
                        for (int ky = 0; ky < 3; ++ky) {
                            for (int kx = 0; kx < 3; ++kx) {
                                const std::int64_t sy = yy + ky - 1, sx = xx + kx - 1;
                                if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                                acc += w.at(o, c, ky, kx) * x.at(s, c, sy, sx);
                            }
                        }
                    }
                    y.at(s, o, yy, xx) = acc;
                }
            }
        }
    }
    return y;
}

}  // namespace

TEST_CASE("relu: forward and backward on a worked example") {
    const T x({2}, {-1.0, 2.0});
    const T y = relu_forward(x);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 2.0);

    const T dy({2}, {1.0, 1.0});
    const T dx = relu_backward(x, dy);
    CHECK(dx[0] == 0.0);
    CHECK(dx[1] == 1.0);

    // Exactly zero is treated as the flat side.
    const T z({1}, {0.0});
    CHECK(relu_backward(z, T({1}, {5.0}))[0] == 0.0);

    CHECK_THROWS_AS(relu_backward(x, T({3})), ShapeError);
}

TEST_CASE("tanh: matches std::tanh and its derivative identity") {
    const T x({5}, {-2.0, -0.5, 0.0, 0.5, 2.0});
    const T y = tanh_forward(x);
    for (std::int64_t i = 0; i < 5; ++i) CHECK(y[i] == doctest::Approx(std::tanh(x[i])));

    const T ones = T::full({5}, 1.0);
    const T dx = tanh_backward(y, ones);
    for (std::int64_t i = 0; i < 5; ++i) {
        CHECK(dx[i] == doctest::Approx(1.0 - y[i] * y[i]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(tanh_backward(y, T({2})), ShapeError);
}

TEST_CASE("dense: identity weights pass input through") {
    const T x = random_tensor({3, 4}, 11);
    T w({4, 4});
    for (int i = 0; i < 4; ++i) w.at(i, i) = 1.0;
    const T y = dense_forward(x, w, T({4}));
    REQUIRE(y.same_shape(x));
    for (std::int64_t i = 0; i < y.numel(); ++i) CHECK(y[i] == doctest::Approx(x[i]));
}

TEST_CASE("dense: worked example with bias") {
    const T x({1, 2}, {1.0, 2.0});
    const T w({2, 2}, {3.0, 4.0, 5.0, 6.0});  // rows are output units
    const T b({2}, {10.0, 20.0});
    const T y = dense_forward(x, w, b);
    CHECK(y.at(0, 0) == doctest::Approx(1.0 * 3.0 + 2.0 * 4.0 + 10.0));
    CHECK(y.at(0, 1) == doctest::Approx(1.0 * 5.0 + 2.0 * 6.0 + 20.0));

    CHECK_THROWS_AS(dense_forward(T({1, 3}), w, b), ShapeError);
    CHECK_THROWS_AS(dense_forward(x, w, T({3})), ShapeError);
}

TEST_CASE("conv3x3: centered delta kernel is the identity") {
    const T x = random_tensor({2, 3, 5, 7}, 21);
    T w({3, 3, 3, 3});
    for (int o = 0; o < 3; ++o) w.at(o, o, 1, 1) = 1.0;
    const T y = conv3x3_forward(x, w, T({3}));
    REQUIRE(y.same_shape(x));
    for (std::int64_t i = 0; i < y.numel(); ++i) CHECK(y[i] == doctest::Approx(x[i]));
}

TEST_CASE("conv3x3: agrees with the direct seven-loop reference") {
    const T x = random_tensor({2, 4, 6, 5}, 31);
    const T w = random_tensor({3, 4, 3, 3}, 32);
    const T b = random_tensor({3}, 33);
    const T got = conv3x3_forward(x, w, b);
    const T want = naive_conv3x3(x, w, b);
    REQUIRE(got.same_shape(want));
    for (std::int64_t i = 0; i < got.numel(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }

    T bad_w = random_tensor({3, 5, 3, 3}, 34);  // channel mismatch
    CHECK_THROWS_AS(conv3x3_forward(x, bad_w, b), ShapeError);
}

TEST_CASE("maxpool2: picks window maxima, floors odd extents, first wins ties") {
    T x({1, 1, 4, 4});
    const double vals[16] = {1, 2, 5, 3,   // windows: [1 2; 4 0] -> 4 at (1,0)
                             4, 0, 1, 1,   //          [5 3; 1 1] -> 5 at (0,2)
                             7, 7, 2, 2,   // all-tied window -> first (2,0)
                             7, 7, 2, 2};  // all-tied window -> first (2,2)
    for (int i = 0; i < 16; ++i) x[i] = vals[i];

    std::vector<std::int64_t> idx;
    const T y = maxpool2_forward(x, &idx);
    REQUIRE(y.shape() == std::vector<std::int64_t>({1, 1, 2, 2}));
    CHECK(y.at(0, 0, 0, 0) == 4.0);
    CHECK(y.at(0, 0, 0, 1) == 5.0);
    CHECK(y.at(0, 0, 1, 0) == 7.0);
    CHECK(y.at(0, 0, 1, 1) == 2.0);
    CHECK(idx[0] == 1 * 4 + 0);  // flat offsets within the sample
    CHECK(idx[1] == 0 * 4 + 2);
    CHECK(idx[2] == 2 * 4 + 0);  // tie resolved to scan-order first
    CHECK(idx[3] == 2 * 4 + 2);

    // Odd extents lose the trailing row/column.
    std::vector<std::int64_t> idx2;
    const T y2 = maxpool2_forward(random_tensor({1, 2, 5, 7}, 41), &idx2);
    CHECK(y2.shape() == std::vector<std::int64_t>({1, 2, 2, 3}));

    std::vector<std::int64_t> idx3;
    CHECK_THROWS_AS(maxpool2_forward(T({1, 1, 1, 4}), &idx3), ShapeError);
}

TEST_CASE("maxpool2: backward scatters into the winning slots") {
    T x({1, 1, 2, 2}, {1.0, 9.0, 3.0, 2.0});
    std::vector<std::int64_t> idx;
    const T y = maxpool2_forward(x, &idx);
    CHECK(y[0] == 9.0);

    const T dy({1, 1, 1, 1}, {2.5});
    const T dx = maxpool2_backward(dy, idx, {1, 1, 2, 2});
    CHECK(dx[0] == 0.0);
    CHECK(dx[1] == 2.5);
    CHECK(dx[2] == 0.0);
    CHECK(dx[3] == 0.0);
}

TEST_CASE("global maxpool: one maximum per channel, gradient routed to it") {
    T x({2, 2, 2, 3});
    Rng rng(55);
    for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = rng.uniform(-1.0, 1.0);
    x.at(0, 0, 1, 2) = 5.0;
    x.at(0, 1, 0, 0) = 6.0;
    x.at(1, 0, 0, 1) = 7.0;
    x.at(1, 1, 1, 1) = 8.0;

    std::vector<std::int64_t> idx;
    const T y = global_maxpool_forward(x, &idx);
    REQUIRE(y.shape() == std::vector<std::int64_t>({2, 2}));
    CHECK(y.at(0, 0) == 5.0);
    CHECK(y.at(0, 1) == 6.0);
    CHECK(y.at(1, 0) == 7.0);
    CHECK(y.at(1, 1) == 8.0);

    T dy({2, 2}, {1.0, 2.0, 3.0, 4.0});
    const T dx = global_maxpool_backward(dy, idx, {2, 2, 2, 3});
    CHECK(dx.at(0, 0, 1, 2) == 1.0);
    CHECK(dx.at(0, 1, 0, 0) == 2.0);
    CHECK(dx.at(1, 0, 0, 1) == 3.0);
    CHECK(dx.at(1, 1, 1, 1) == 4.0);
    double total = 0.0;
    for (std::int64_t i = 0; i < dx.numel(); ++i) total += std::fabs(dx[i]);
    CHECK(total == doctest::Approx(10.0));
}

TEST_CASE("global maxpool: ties go to the first position in scan order") {
    T x = T::full({1, 1, 2, 2}, 3.0);
    std::vector<std::int64_t> idx;
    global_maxpool_forward(x, &idx);
    CHECK(idx[0] == 0);
}

TEST_CASE("layernorm: constant rows collapse to beta") {
    const T x = T::full({2, 8}, 4.2);
    const T gamma = T::full({8}, 1.5);
    const T beta = T::full({8}, -0.25);
    LayerNormCache<double> cache;
    const T y = layernorm_forward(x, gamma, beta, &cache);
    for (std::int64_t i = 0; i < y.numel(); ++i) {
        CHECK(y[i] == doctest::Approx(-0.25).epsilon(1e-12));
    }
}

TEST_CASE("layernorm: output rows have zero mean and unit variance") {
    const T x = random_tensor({4, 32}, 66, -3.0, 3.0);
    const T gamma = T::full({32}, 1.0);
    const T beta = T({32});
    LayerNormCache<double> cache;
    const T y = layernorm_forward(x, gamma, beta, &cache);
    for (std::int64_t i = 0; i < 4; ++i) {
        double mean = 0.0;
        for (std::int64_t j = 0; j < 32; ++j) mean += y.at(i, j);
        mean /= 32.0;
        double var = 0.0;
        for (std::int64_t j = 0; j < 32; ++j) var += (y.at(i, j) - mean) * (y.at(i, j) - mean);
        var /= 32.0;
        CHECK(mean == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        // Population variance with the 1e-5 stabilizer leaves it just shy of 1.
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }
}

// --- finite-difference checks -------------------------------------------------
//
// Each layer's loss is sum(weights * forward(...)), whose exact parameter
// gradient is the layer backward applied to `weights`. All in double.

TEST_CASE("gradcheck: verifier accepts a correct gradient and rejects a scaled one") {
    T x({2}, {1.0, 2.0});
    const auto loss = [&]() { return x[0] * x[0] + x[1] * x[1]; };

    const T good({2}, {2.0, 4.0});
    const GradCheckReport ok = check_gradient(loss, x, good);
    CHECK(ok.checked == 2);
    CHECK(ok.max_rel_err <= 1e-9);

    const T doubled({2}, {4.0, 8.0});
    const GradCheckReport bad = check_gradient(loss, x, doubled);
    CHECK(bad.max_rel_err == doctest::Approx(0.5).epsilon(1e-6));

    const auto flat = [&]() { return 7.0; };
    const GradCheckReport zero = check_gradient(flat, x, T({2}));
    CHECK(zero.max_rel_err == 0.0);

    CHECK_THROWS_AS(check_gradient(loss, x, T({3})), ShapeError);
}

TEST_CASE("gradcheck: large parameters are subsampled") {
    T x = random_tensor({500}, 77);
    T grad({500});
    for (std::int64_t i = 0; i < 500; ++i) grad[i] = 2.0 * x[i];
    const auto loss = [&]() {
        double acc = 0.0;
        for (std::int64_t i = 0; i < 500; ++i) acc += x[i] * x[i];
        return acc;
    };
    const GradCheckReport r = check_gradient(loss, x, grad, 1e-5, 64, 3);
    CHECK(r.checked == 64);
    CHECK(r.max_rel_err <= 1e-5);
}

TEST_CASE("conv3x3: analytic gradients pass finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        T x = random_tensor({2, 2, 4, 5}, 100 + seed);
        T w = random_tensor({3, 2, 3, 3}, 200 + seed);
        T b = random_tensor({3}, 300 + seed);
        const T weights = random_tensor({2, 3, 4, 5}, 400 + seed);

        T dx, dw, db;
        conv3x3_backward(x, w, weights, &dx, &dw, &db);
        const auto loss = [&]() { return weighted_sum(conv3x3_forward(x, w, b), weights); };
        CHECK(check_gradient(loss, x, dx, 1e-5, 64, seed).max_rel_err <= 1e-5);
        CHECK(check_gradient(loss, w, dw, 1e-5, 64, seed).max_rel_err <= 1e-5);
        CHECK(check_gradient(loss, b, db, 1e-5, 64, seed).max_rel_err <= 1e-5);
    }
}

TEST_CASE("dense: analytic gradients pass finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        T x = random_tensor({3, 6}, 500 + seed);
        T w = random_tensor({4, 6}, 600 + seed);
        T b = random_tensor({4}, 700 + seed);
        const T weights = random_tensor({3, 4}, 800 + seed);

        T dx, dw, db;
        dense_backward(x, w, weights, &dx, &dw, &db);
        const auto loss = [&]() { return weighted_sum(dense_forward(x, w, b), weights); };
        CHECK(check_gradient(loss, x, dx, 1e-5, 64, seed).max_rel_err <= 1e-5);
        CHECK(check_gradient(loss, w, dw, 1e-5, 64, seed).max_rel_err <= 1e-5);
        CHECK(check_gradient(loss, b, db, 1e-5, 64, seed).max_rel_err <= 1e-5);
    }
}

TEST_CASE("relu: analytic gradient passes finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        T x = staggered_tensor({4, 9}, 900 + seed);
        const T weights = random_tensor({4, 9}, 1000 + seed);
        const T dx = relu_backward(x, weights);
        const auto loss = [&]() { return weighted_sum(relu_forward(x), weights); };
        CHECK(check_gradient(loss, x, dx, 1e-5, 64, seed).max_rel_err <= 1e-5);
    }
}

TEST_CASE("tanh: analytic gradient passes finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        T x = random_tensor({4, 9}, 1100 + seed, -2.0, 2.0);
        const T weights = random_tensor({4, 9}, 1200 + seed);
        const T dx = tanh_backward(tanh_forward(x), weights);
        const auto loss = [&]() { return weighted_sum(tanh_forward(x), weights); };
        CHECK(check_gradient(loss, x, dx, 1e-5, 64, seed).max_rel_err <= 1e-5);
    }
}

TEST_CASE("maxpool2: analytic gradient passes finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        T x = staggered_tensor({2, 2, 4, 6}, 1300 + seed);
        const T weights = random_tensor({2, 2, 2, 3}, 1400 + seed);
        std::vector<std::int64_t> idx;
        maxpool2_forward(x, &idx);
        const T dx = maxpool2_backward(weights, idx, x.shape());
        const auto loss = [&]() {
            std::vector<std::int64_t> scratch;
            return weighted_sum(maxpool2_forward(x, &scratch), weights);
        };
        CHECK(check_gradient(loss, x, dx, 1e-5, 64, seed).max_rel_err <= 1e-5);
    }
}

TEST_CASE("global maxpool: analytic gradient passes finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        T x = staggered_tensor({2, 3, 4, 5}, 1500 + seed);
        const T weights = random_tensor({2, 3}, 1600 + seed);
        std::vector<std::int64_t> idx;
        global_maxpool_forward(x, &idx);
        const T dx = global_maxpool_backward(weights, idx, x.shape());
        const auto loss = [&]() {
            std::vector<std::int64_t> scratch;
            return weighted_sum(global_maxpool_forward(x, &scratch), weights);
        };
        CHECK(check_gradient(loss, x, dx, 1e-5, 64, seed).max_rel_err <= 1e-5);
    }
}

TEST_CASE("layernorm: analytic gradients pass finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        T x = random_tensor({3, 8}, 1700 + seed, -2.0, 2.0);
        T gamma = random_tensor({8}, 1800 + seed, 0.5, 1.5);
        T beta = random_tensor({8}, 1900 + seed);
        const T weights = random_tensor({3, 8}, 2000 + seed);

        LayerNormCache<double> cache;
        layernorm_forward(x, gamma, beta, &cache);
        T dx, dgamma, dbeta;
        layernorm_backward(cache, gamma, weights, &dx, &dgamma, &dbeta);

        const auto loss = [&]() {
            LayerNormCache<double> c;
            return weighted_sum(layernorm_forward(x, gamma, beta, &c), weights);
        };
        CHECK(check_gradient(loss, x, dx, 1e-5, 64, seed).max_rel_err <= 1e-5);
        CHECK(check_gradient(loss, gamma, dgamma, 1e-5, 64, seed).max_rel_err <= 1e-5);
        CHECK(check_gradient(loss, beta, dbeta, 1e-5, 64, seed).max_rel_err <= 1e-5);
    }
}

#include "sdquant/bench.hpp"
#include "sdquant/decode.hpp"
#include "sdquant/frames.hpp"
#include "sdquant/numkit.hpp"
#include "sdquant/quant.hpp"
#include "sdquant/rng.hpp"

#include "support/simplex_lp.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace sdquant;
using Catch::Approx;

namespace {

ComplexMatrix random_complex_matrix(Index rows, Index cols, std::uint64_t seed) {
    RngStream rng(seed);
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.complex_normal();
    return m;
}

ComplexVector random_complex_vector(Index n, std::uint64_t seed) {
    RngStream rng(seed);
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.complex_normal();
    return v;
}

} // namespace

TEST_CASE("sobolev_dual is a left inverse") {
    const ComplexMatrix a = random_complex_matrix(24, 5, 1);
    for (int r : {0, 1, 2}) {
        const ComplexMatrix dual = decode::sobolev_dual(a, r);
        REQUIRE(dual.rows() == 5);
        REQUIRE(dual.cols() == 24);
        CHECK((dual * a - ComplexMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("sobolev_dual with r = 0 is the pseudoinverse") {
    const ComplexMatrix a = random_complex_matrix(12, 4, 2);
    const ComplexMatrix dual = decode::sobolev_dual(a, 0);
    const ComplexMatrix pinv =
        (a.adjoint() * a).ldlt().solve(ComplexMatrix(a.adjoint()));
    CHECK((dual - pinv).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("sobolev_dual on a DFT frame column") {
    const ComplexMatrix dft = frames::build_dft(8);
    const ComplexMatrix a = dft.leftCols(1);
    const ComplexMatrix dual = decode::sobolev_dual(a, 1);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const ComplexVector x = random_complex_vector(1, 50 + s);
        CHECK(((dual * (a * x)) - x).norm() < 1e-10);
    }
}

TEST_CASE("sobolev_dual singular input") {
    ComplexMatrix a(6, 2);
    a.col(0) = random_complex_vector(6, 3);
    a.col(1) = a.col(0); // rank 1
    CHECK_THROWS_AS(decode::sobolev_dual(a, 1), singular_operator_error);
    ComplexMatrix wide = random_complex_matrix(2, 6, 4);
    CHECK_THROWS_AS(decode::sobolev_dual(wide, 1), std::invalid_argument);
}

TEST_CASE("sobolev_decode") {
    const ComplexMatrix a = random_complex_matrix(32, 6, 5);
    const ComplexVector x = random_complex_vector(6, 6);

    SECTION("exact data is recovered") {
        const auto out = decode::sobolev_decode(a, 1, a * x);
        CHECK(out.converged);
        CHECK((out.x_hat - x).norm() < 1e-10);
    }

    SECTION("zero q gives zero x_hat") {
        const auto out = decode::sobolev_decode(a, 2, ComplexVector::Zero(32));
        CHECK(out.x_hat.norm() == 0.0);
    }

    SECTION("matches the explicit dual and the operator-norm bound") {
        const double delta = 0.05;
        const ComplexVector y = a * x;
        const quant::QuantAlphabet alph(delta, quant::stable_radius(max_abs(y), delta, 1));
        const auto sd = quant::sigma_delta_quantize(y, 1, alph);
        REQUIRE_FALSE(sd.overloaded);
        const auto out = decode::sobolev_decode(a, 1, sd.q);
        const ComplexMatrix dual = decode::sobolev_dual(a, 1);
        CHECK((out.x_hat - dual * sd.q).norm() < 1e-9);
        const double opnorm = numkit::singular_values(dual)[0];
        CHECK((out.x_hat - x).norm() <= opnorm * (sd.q - y).norm() + 1e-12);
    }
}

TEST_CASE("consistent_decode") {
    const Index m = 24, k = 3;
    const ComplexMatrix a =
        frames::apply_selection(frames::build_dft(m),
                                [] {
                                    RngStream rng(7, {1});
                                    return frames::draw_selection(24, 24, rng);
                                }())
            .leftCols(k);
    const ComplexVector x = random_complex_vector(k, 8) / 3.0;

    SECTION("exact q is feasible quickly") {
        auto cfg = decode::DecoderConfig::defaults(1, 0.1);
        const auto out = decode::consistent_decode(a, 1, a * x, cfg);
        CHECK(out.converged);
        CHECK(out.residual_inf <= 0.05 + cfg.feasibility_tol);
    }

    SECTION("the quantized instance keeps the true signal feasible") {
        const double delta = 0.1;
        for (int r : {1, 2}) {
            const ComplexVector y = a * x;
            const quant::QuantAlphabet alph(delta, quant::stable_radius(max_abs(y), delta, r));
            const auto sd = quant::sigma_delta_quantize(y, r, alph);
            REQUIRE_FALSE(sd.overloaded);
            // residual of the true x equals the state vector u
            const double feas_x = box_inf_norm(numkit::apply_dinv_power(a * x - sd.q, r));
            CHECK(feas_x <= delta / 2.0 + 1e-12);

            auto cfg = decode::DecoderConfig::defaults(r, delta);
            const auto out = decode::consistent_decode(a, r, sd.q, cfg);
            CHECK(out.converged);
            CHECK(out.residual_inf <= delta / 2.0 + cfg.feasibility_tol);
        }
    }

    SECTION("delta = 0 with exact q returns x") {
        decode::DecoderConfig cfg;
        cfg.delta = 0.0;
        cfg.feasibility_tol = 1e-9;
        cfg.max_iterations = 50000;
        const auto out = decode::consistent_decode(a, 1, a * x, cfg);
        CHECK(out.converged);
        CHECK((out.x_hat - x).norm() < 1e-6);
    }
}

TEST_CASE("l1_decode basics") {
    SECTION("zero data decodes to zero immediately") {
        const ComplexMatrix a = random_complex_matrix(8, 16, 9);
        auto cfg = decode::DecoderConfig::defaults(1, 0.3);
        const auto out = decode::l1_decode(a, 1, ComplexVector::Zero(8), cfg);
        CHECK(out.converged);
        CHECK(out.x_hat.norm() == 0.0);
        CHECK(out.iterations == 0);
    }

    SECTION("noiseless sparse recovery on selected DFT rows") {
        const Index n = 64, m = 32;
        const ComplexMatrix dft = frames::build_dft(n);
        RngStream sel_rng(123, {0});
        const ComplexMatrix a = frames::apply_selection(dft, frames::draw_selection(n, m, sel_rng));
        RngStream x_rng(123, {1});
        const ComplexVector x = bench::sample_sparse_signal(n, 3, x_rng);
        auto cfg = decode::DecoderConfig::defaults(1, 1e-8);
        const auto out = decode::l1_decode(a, 1, a * x, cfg);
        CHECK(out.converged);
        CHECK((out.x_hat - x).norm() < 1e-4);
        CHECK(out.x_hat.cwiseAbs().sum() <= x.cwiseAbs().sum() + 1e-6);
    }

    SECTION("feasibility contract on converged outcomes") {
        const ComplexMatrix a = random_complex_matrix(10, 20, 10);
        const ComplexVector q = random_complex_vector(10, 11);
        auto cfg = decode::DecoderConfig::defaults(1, 0.5);
        const auto out = decode::l1_decode(a, 1, q, cfg);
        if (out.converged) CHECK(out.residual_inf <= 0.25 + cfg.feasibility_tol);
        CHECK(out.residual_inf ==
              Approx(box_inf_norm(numkit::apply_dinv_power(a * out.x_hat - q, 1))).margin(1e-12));
    }
}

TEST_CASE("l1_decode matches the LP oracle on small real instances") {
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        const Index n = 4 + static_cast<Index>(trial % 3) * 6; // 4, 10, 16
        const Index m = 4 + static_cast<Index>(trial % 2) * 4; // 4, 8
        RngStream rng(600 + trial);
        RealMatrix k(m, n);
        for (Index i = 0; i < k.size(); ++i) k.data()[i] = rng.normal();
        RealVector z0 = RealVector::Zero(n);
        z0[0] = 1.3;
        z0[n - 1] = -0.7;
        const RealVector b0 = k * z0 + 0.01 * RealVector::NullaryExpr(m, [&](Index) { return rng.normal(); });
        const double delta = 0.25;

        // oracle works on D^-1-premultiplied data so both sides solve the same tube
        RealMatrix dinv_k(m, n);
        for (Index c = 0; c < n; ++c)
            dinv_k.col(c) =
                numkit::apply_dinv_power(k.col(c).cast<Complex>().eval(), 1).real();
        const RealVector dinv_b = numkit::apply_dinv_power(b0.cast<Complex>().eval(), 1).real();
        const double oracle = testsupport::l1_tube_optimum(dinv_k, dinv_b, delta / 2.0);

        auto cfg = decode::DecoderConfig::defaults(1, delta);
        cfg.convergence_tol = 1e-9;
        const auto out = decode::l1_decode(k.cast<Complex>(), 1, b0.cast<Complex>(), cfg);
        REQUIRE(out.converged);
        CHECK(out.x_hat.imag().cwiseAbs().maxCoeff() < 1e-9); // real data stays real
        CHECK(out.x_hat.cwiseAbs().sum() == Approx(oracle).margin(1e-4));
    }
}

TEST_CASE("l1 worst-case error does not degrade as delta shrinks") {
    const Index n = 32, m = 48, k = 3;
    const ComplexMatrix dft = frames::build_dft(n);
    double worst[3] = {0, 0, 0};
    const double deltas[3] = {0.2, 0.1, 0.05};
    for (int di = 0; di < 3; ++di) {
        for (std::uint64_t t = 0; t < 5; ++t) {
            RngStream sel_rng(70, {t});
            const ComplexMatrix a = frames::apply_selection(dft, frames::draw_selection(n, m, sel_rng));
            RngStream x_rng(71, {t});
            const ComplexVector x = bench::sample_sparse_signal(n, k, x_rng);
            const ComplexVector y = a * x;
            const quant::QuantAlphabet alph(deltas[di],
                                            quant::stable_radius(max_abs(y), deltas[di], 1));
            const auto sd = quant::sigma_delta_quantize(y, 1, alph);
            REQUIRE_FALSE(sd.overloaded);
            const auto out =
                decode::l1_decode(a, 1, sd.q, decode::DecoderConfig::defaults(1, deltas[di]));
            worst[di] = std::max(worst[di], decode::sparse_error(x, out.x_hat));
        }
    }
    // trend with 10% slack for statistical noise
    CHECK(worst[1] <= worst[0] * 1.1);
    CHECK(worst[2] <= worst[1] * 1.1);
}

TEST_CASE("reconstruction error against the frame bound") {
    // err <= c * delta * (m/l)^{-r} sqrt(m) / sigma_min(V_l^H F), c frozen at 0.2
    const double frozen_c = 0.2;
    const Index k = 10;
    const double delta = 0.1;
    for (Index m : {100, 224, 500}) {
        const auto frame = frames::build_harmonic_frame(m, frames::last_k_omega(m, k));
        const Index l = std::max<Index>(k, m / 10);
        const ComplexMatrix vl = numkit::analytic_svd_dinv(m).low_frequency_basis(l).cast<Complex>();
        for (std::uint64_t t = 0; t < 10; ++t) {
            RngStream rng(80, {static_cast<std::uint64_t>(m), t});
            const ComplexMatrix a =
                frames::apply_selection(frame.matrix, frames::draw_selection(m, m, rng));
            const ComplexVector x = bench::sample_unit_ball(k, rng);
            const ComplexVector y = a * x;
            const quant::QuantAlphabet alph(delta, quant::stable_radius(max_abs(y), delta, 1));
            const auto sd = quant::sigma_delta_quantize(y, 1, alph);
            REQUIRE_FALSE(sd.overloaded);
            const auto out = decode::sobolev_decode(a, 1, sd.q);
            const double err = decode::sparse_error(x, out.x_hat);
            const RealVector s = numkit::singular_values((vl.adjoint() * a).eval());
            const double bound = delta * (static_cast<double>(l) / static_cast<double>(m)) *
                                 std::sqrt(static_cast<double>(m)) / s[s.size() - 1];
            CHECK(err <= frozen_c * bound);
        }
    }
}

TEST_CASE("sparse_error") {
    ComplexVector a(2), b(2);
    a << Complex{1, 0}, Complex{0, 0};
    b << Complex{0, 0}, Complex{1, 0};
    CHECK(decode::sparse_error(a, a) == 0.0);
    CHECK(decode::sparse_error(a, ComplexVector::Zero(2)) == Approx(1.0));
    CHECK(decode::sparse_error(a, b) == Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(decode::sparse_error(a, ComplexVector::Zero(3)), std::invalid_argument);
}

TEST_CASE("simplex oracle self-checks") {
    // min ||z||_1 s.t. |z - 3| <= 1 in 1-D: optimum 2
    Eigen::MatrixXd k(1, 1);
    k << 1.0;
    Eigen::VectorXd b(1);
    b << 3.0;
    CHECK(testsupport::l1_tube_optimum(k, b, 1.0) == Approx(2.0).margin(1e-9));

    // tube contains the origin: optimum 0
    b << 0.5;
    CHECK(testsupport::l1_tube_optimum(k, b, 1.0) == Approx(0.0).margin(1e-9));

    // two constraints, known geometry: |z1 + z2 - 2| <= 0.5, |z1 - z2| <= 0.5
    Eigen::MatrixXd k2(2, 2);
    k2 << 1, 1, 1, -1;
    Eigen::VectorXd b2(2);
    b2 << 2.0, 0.0;
    // best is z1 = z2 = 0.75: objective 1.5
    CHECK(testsupport::l1_tube_optimum(k2, b2, 0.5) == Approx(1.5).margin(1e-9));
}

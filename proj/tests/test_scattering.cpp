#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "anderson/potential.hpp"
#include "anderson/scattering.hpp"

using namespace anderson;
using std::numbers::pi;

namespace {

// Midpoint-free RK4 integration of -u'' + f u = E u across [-1/2, 1/2]; an
// independent route to g(E) used to check the exact piece propagators.
TransferMatrix rk4_transfer(const SingleSitePotential& p, double E, int steps_per_piece = 4000)
{
    auto propagate = [&](double u, double du) {
        for (std::size_t i = 0; i < p.piece_count(); ++i) {
            const double q = p.values()[i];
            const double h = p.width(i) / steps_per_piece;
            for (int s = 0; s < steps_per_piece; ++s) {
                auto f = [&](double y, double dy, double& ry, double& rdy) {
                    ry = dy;
                    rdy = (q - E) * y;
                };
                double k1y, k1d, k2y, k2d, k3y, k3d, k4y, k4d;
                f(u, du, k1y, k1d);
                f(u + 0.5 * h * k1y, du + 0.5 * h * k1d, k2y, k2d);
                f(u + 0.5 * h * k2y, du + 0.5 * h * k2d, k3y, k3d);
                f(u + h * k3y, du + h * k3d, k4y, k4d);
                u += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
                du += h / 6 * (k1d + 2 * k2d + 2 * k3d + k4d);
            }
        }
        return std::pair{u, du};
    };
    auto [u1, du1] = propagate(1.0, 0.0);
    auto [u2, du2] = propagate(0.0, 1.0);
    return {u1, u2, du1, du2};
}

std::vector<SingleSitePotential> test_potentials()
{
    return {square_barrier(1.0), square_barrier(2 * pi * pi), square_barrier(-10.0), antisymmetric_step(6 * pi * pi),
            validate({-0.5, -0.3, 0.1, 0.2, 0.5}, {3.0, -5.0, 12.0, 0.5})};
}

} // namespace

TEST(PiecePropagator, FreeMatricesMatchClosedForms)
{
    const double k = 1.7;
    auto g = piece_propagator(k * k, 0.0, 1.0);
    EXPECT_NEAR(g.m11, std::cos(k), 1e-15);
    EXPECT_NEAR(g.m12, std::sin(k) / k, 1e-15);
    EXPECT_NEAR(g.m21, -k * std::sin(k), 1e-15);
    EXPECT_NEAR(g.m22, std::cos(k), 1e-15);

    const double a = 1.3;
    auto h = piece_propagator(-a * a, 0.0, 1.0);
    EXPECT_NEAR(h.m11, std::cosh(a), 1e-14);
    EXPECT_NEAR(h.m12, std::sinh(a) / a, 1e-14);
    EXPECT_NEAR(h.m21, a * std::sinh(a), 1e-14);
    EXPECT_NEAR(h.m22, std::cosh(a), 1e-14);

    auto shear = piece_propagator(3.0, 3.0, 0.5);
    EXPECT_EQ(shear.m11, 1.0);
    EXPECT_EQ(shear.m12, 0.5);
    EXPECT_EQ(shear.m21, 0.0);
    EXPECT_EQ(shear.m22, 1.0);
}

TEST(PiecePropagator, SeriesBranchIsContinuous)
{
    // either side of the |z| = 1e-4 switch
    for (double z : {0.99e-4, 1.01e-4, -0.99e-4, -1.01e-4}) {
        auto g = piece_propagator(z, 0.0, 1.0);
        const double w = std::sqrt(std::abs(z));
        const double c = z > 0 ? std::cos(w) : std::cosh(w);
        const double s = z > 0 ? std::sin(w) / w : std::sinh(w) / w;
        EXPECT_NEAR(g.m11, c, 1e-15);
        EXPECT_NEAR(g.m12, s, 1e-15);
    }
}

TEST(TransferMatrix, MatchesRungeKutta)
{
    auto p = validate({-0.5, -0.3, 0.1, 0.2, 0.5}, {3.0, -5.0, 12.0, 0.5});
    for (double E : {-7.0, 0.3, 5.0, 40.0}) EXPECT_LT(max_entry_diff(transfer_matrix(p, E), rk4_transfer(p, E)), 1e-9);
}

TEST(TransferMatrix, ClosedFormExamples)
{
    auto free = free_potential();
    auto g = transfer_matrix(free, pi * pi);
    EXPECT_LT(max_entry_diff(g, {-1, 0, 0, -1}), 1e-15);

    for (double E : {1.5, 7.0, 33.3}) EXPECT_LT(max_entry_diff(transfer_matrix(square_barrier(1.0), E), example1_transfer(1.0, E)), 1e-12);
    const double lambda = 6 * pi * pi;
    for (double E : {60.0, 100.0, 400.0})
        EXPECT_LT(max_entry_diff(transfer_matrix(antisymmetric_step(lambda), E), example2_transfer(lambda, E)), 1e-11);
}

TEST(TransferMatrix, DeterminantIsOne)
{
    for (const auto& p : test_potentials())
        for (double E = -30; E <= 200; E += 1.37) {
            // cancellation in the determinant scales with the squared entries
            const auto g = transfer_matrix(p, E);
            EXPECT_NEAR(g.det(), 1.0, 1e-14 * std::max(1.0, max_abs_entry(g) * max_abs_entry(g))) << E;
        }
}

TEST(Jost, FreePotential)
{
    for (double k : {0.1, 1.0, 7.5}) {
        auto s = jost_coefficients(free_potential(), k);
        EXPECT_NEAR(std::abs(s.a - 1.0), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(s.b), 0.0, 1e-14);
    }
}

TEST(Jost, ExampleOneValues)
{
    auto p = square_barrier(1.0);
    auto s = jost_coefficients(p, std::sqrt(pi * pi + 1));
    EXPECT_LT(std::abs(s.b), 1e-14);
    EXPECT_NEAR(std::abs(s.a), 1.0, 1e-14);

    // frozen from an arbitrary-precision evaluation of the closed form at lambda = 1, k = 2
    auto t = jost_coefficients(p, 2.0);
    EXPECT_NEAR(t.a.real(), 0.973616658830070189501281171051, 1e-13);
    EXPECT_NEAR(t.a.imag(), -0.269010938325172470808918493742, 1e-13);
    EXPECT_NEAR(t.b.real(), 0.0, 1e-14);
    EXPECT_NEAR(t.b.imag(), 0.14246502479562848543522743843, 1e-13);
}

TEST(Jost, KTooSmall)
{
    try {
        jost_coefficients(square_barrier(1.0), 1e-7);
        FAIL();
    }
    catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::KTooSmall);
    }
    EXPECT_NO_THROW(jost_coefficients(square_barrier(1.0), 1e-6));
}

TEST(Jost, WronskianAndConjugateSymmetry)
{
    for (const auto& p : test_potentials()) {
        for (double k = 0.1; k <= 20; k += 0.0373) {
            auto s = jost_coefficients(p, k);
            EXPECT_NEAR(std::norm(s.a) - std::norm(s.b), 1.0, 1e-14 * std::max(1.0, std::norm(s.a)));
            EXPECT_LT(std::abs(wronskian_residual(p, k)), 1e-10);
            auto r = jost_coefficients(p, -k);
            EXPECT_LT(std::abs(r.a - std::conj(s.a)), 1e-10);
            EXPECT_LT(std::abs(r.b - std::conj(s.b)), 1e-10);
        }
    }
}

TEST(Jost, WronskianResidualInDeepWell)
{
    // |a| ~ 2.5e6 here, far past what a double-precision subtraction can resolve
    auto p = antisymmetric_step(48 * pi * pi);
    auto s = jost_coefficients(p, 0.1);
    EXPECT_GT(std::abs(s.a), 1e6);
    EXPECT_LT(std::abs(wronskian_residual(p, 0.1)), 1e-10);
    EXPECT_LT(std::abs(wronskian_residual(free_potential(), 3.0)), 1e-30);
    // residual tracks |a|^2 - |b|^2 - 1 where that is resolvable
    auto q = square_barrier(1.0);
    auto t = jost_coefficients(q, 2.0);
    EXPECT_NEAR(wronskian_residual(q, 2.0), std::norm(t.a) - std::norm(t.b) - 1, 1e-14);
}

TEST(Jost, RealOnImaginaryAxis)
{
    for (const auto& p : test_potentials()) {
        for (double alpha = 0.2; alpha < 4; alpha += 0.17) {
            for (double sign : {1.0, -1.0}) {
                auto s = jost_coefficients(p, cplx(0, sign * alpha));
                const double scale = std::max({1.0, std::abs(s.a), std::abs(s.b)});
                EXPECT_LT(std::abs(s.a.imag()) / scale, 1e-10);
                EXPECT_LT(std::abs(s.b.imag()) / scale, 1e-10);
            }
        }
    }
}

TEST(TransferFromScattering, RoundTripsPropagation)
{
    for (const auto& p : test_potentials())
        for (double k = 0.1; k <= 20; k += 0.211)
            EXPECT_LT(max_entry_diff(transfer_from_scattering(jost_coefficients(p, k)), transfer_matrix(p, k * k)), 1e-10);

    auto s = example1_scattering(1.0, 4.0);
    EXPECT_LT(max_entry_diff(transfer_from_scattering(s), transfer_matrix(square_barrier(1.0), 4.0)), 1e-11);
}

TEST(TransferFromScattering, TrivialAndRotationCases)
{
    const double k = 2.3;
    auto g = transfer_from_scattering({cplx(k, 0), cplx(1, 0), cplx(0, 0)});
    EXPECT_LT(max_entry_diff(g, free_transfer(k * k)), 1e-15);

    const double phi = 0.7;
    auto r = transfer_from_scattering({cplx(k, 0), std::polar(1.0, phi), cplx(0, 0)});
    EXPECT_NEAR(r.m11, std::cos(k + phi), 1e-15);
    EXPECT_NEAR(r.m12 * k, std::sin(k + phi), 1e-15);
    EXPECT_NEAR(r.m21 / k, -std::sin(k + phi), 1e-15);

    EXPECT_THROW(transfer_from_scattering({cplx(1, 1), cplx(1, 0), cplx(0, 0)}), Error);
    EXPECT_THROW(transfer_from_scattering({cplx(-1, 0), cplx(1, 0), cplx(0, 0)}), Error);
}

TEST(ClosedForms, ExampleTwoReflectionlessPoint)
{
    const double lambda = 6 * pi * pi, E = 10 * pi * pi;
    auto s = example2_scattering(lambda, E);
    EXPECT_LT(std::abs(s.b), 1e-13);
    // n = 2, m = 1: g = -I, hence a = -e^{-ik} with k = pi sqrt(10)
    const cplx expected(0.872837096712499552806411377534, -0.488011682854513947492405301576);
    EXPECT_LT(std::abs(s.a - expected), 1e-12);
    EXPECT_NEAR(std::abs(s.a), 1.0, 1e-13);

    auto prop = jost_coefficients(antisymmetric_step(lambda), std::sqrt(E));
    EXPECT_LT(std::abs(prop.a - expected), 1e-11);
    EXPECT_LT(std::abs(prop.b), 1e-11);
}

TEST(ClosedForms, ExampleOneLambdaZeroIsFree)
{
    for (double E : {0.5, 3.0, 20.0}) {
        auto s = example1_scattering(0.0, E);
        EXPECT_LT(std::abs(s.a - 1.0), 1e-15);
        EXPECT_EQ(std::abs(s.b), 0.0);
    }
}

TEST(ClosedForms, RangeErrors)
{
    EXPECT_THROW(example1_scattering(5.0, 4.0), Error);
    EXPECT_THROW(example1_scattering(-1.0, -0.5), Error);
    EXPECT_THROW(example2_transfer(10.0, 9.0), Error);
}

TEST(ClosedForms, AgreeWithPropagationOnGrid)
{
    for (double lambda : {1.0, 2 * pi * pi, 6 * pi * pi}) {
        auto p1 = square_barrier(lambda);
        auto p2 = antisymmetric_step(lambda);
        const double lo = lambda + 0.05;
        for (int i = 0; i < 200; ++i) {
            const double E = lo + (400.0 - lo) * i / 199.0;
            EXPECT_LT(max_entry_diff(transfer_matrix(p1, E), example1_transfer(lambda, E)), 1e-10);
            EXPECT_LT(max_entry_diff(transfer_matrix(p2, E), example2_transfer(lambda, E)), 1e-10);
            auto s = jost_coefficients(p1, std::sqrt(E));
            auto c = example1_scattering(lambda, E);
            EXPECT_LT(std::abs(s.a - c.a), 1e-10);
            EXPECT_LT(std::abs(s.b - c.b), 1e-10);
        }
    }
}

TEST(SpectralPoint, Branches)
{
    auto pos = SpectralPoint::from_energy(4.0);
    EXPECT_EQ(pos.k, cplx(2.0, 0.0));
    auto neg = SpectralPoint::from_energy(-9.0);
    EXPECT_EQ(neg.k, cplx(0.0, 3.0));
    EXPECT_NEAR(std::abs(neg.k * neg.k - (-9.0)), 0.0, 1e-13);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ttlab/field.hpp"
#include "ttlab/grid.hpp"
#include "ttlab/inequalities.hpp"
#include "ttlab/multiindex.hpp"
#include "ttlab/oracle.hpp"

using namespace ttlab;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;

SpectralScalar single_cos(const GridSpec& g, int axis, double amp = 1.0) {
  SpectralScalar f = SpectralScalar::zeros(g);
  std::array<int, 3> jp{0, 0, 0}, jm{0, 0, 0};
  jp[axis] = 1;
  jm[axis] = g.n - 1;
  f.c[flatten(g, jp)] = Complex(0.5 * amp, 0.0);
  f.c[flatten(g, jm)] = Complex(0.5 * amp, 0.0);
  return f;
}

}  // namespace

TEST_CASE("grid validation", "[spectral]") {
  CHECK_THROWS_AS(make_grid(4, 16, 2 * pi, Dealias::one_half), BadDimension);
  CHECK_THROWS_AS(make_grid(1, 16, 2 * pi, Dealias::one_half), BadDimension);
  CHECK_THROWS_AS(make_grid(2, 15, 2 * pi, Dealias::one_half), BadResolution);
  CHECK_THROWS_AS(make_grid(2, 4, 2 * pi, Dealias::one_half), BadResolution);
  CHECK_THROWS_AS(make_grid(2, 16, -1.0, Dealias::one_half), BadLength);

  GridSpec g = make_grid(2, 16, 2 * pi, Dealias::one_half);
  CHECK(g.size() == 256);
  CHECK(g.padded_n() == 32);
  CHECK(g.band_limit() == 7);
  GridSpec g3 = make_grid(3, 12, 1.0, Dealias::two_thirds);
  CHECK(g3.band_limit() == 4);
  CHECK(g3.padded_n() == 18);
}

TEST_CASE("wavenumber conventions", "[spectral]") {
  GridSpec g = make_grid(2, 8, 2 * pi, Dealias::none);
  // signed index: j = 5 on n = 8 means mode -3
  CHECK(g.signed_index(5) == -3);
  CHECK(g.signed_index(3) == 3);
  CHECK(g.signed_index(4) == -4);
  // derivative reading zeroes the unpaired mode, magnitude reading keeps it
  std::array<int, 3> j{4, 0, 0};
  size_t idx = flatten(g, j);
  CHECK(k_deriv_vec(g, idx)[0] == 0.0);
  CHECK(k_mag_sq(g, idx) == Approx(16.0));
}

TEST_CASE("transform round trip and derivative", "[spectral]") {
  GridSpec g = make_grid(2, 16, 2 * pi, Dealias::one_half);
  Spectrum sp{};
  SpectralScalar f = random_band_limited(g, sp, 42);
  std::vector<double> phys = transform_inverse(f);
  SpectralScalar back = transform_forward(g, phys);
  double dev = 0.0;
  for (size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(back.c[i] - f.c[i]));
  CHECK(dev < 1e-13);

  // d/dx1 cos(x1) = -sin(x1)
  SpectralScalar c1 = single_cos(g, 0);
  SpectralScalar d1 = partial_derivative(c1, 0);
  // -sin has coefficients +-1/(2i) -> +i/2 at k=+1
  std::array<int, 3> jp{1, 0, 0};
  CHECK(d1.c[flatten(g, jp)].imag() == Approx(0.5));
  CHECK(d1.c[flatten(g, jp)].real() == Approx(0.0).margin(1e-15));
}

TEST_CASE("product against direct convolution and identity", "[spectral]") {
  GridSpec g = make_grid(2, 8, 2 * pi, Dealias::one_half);
  Spectrum sp{};
  SpectralScalar f = random_band_limited(g, sp, 7);
  SpectralScalar h = random_band_limited(g, sp, 8);
  SpectralScalar p = pointwise_product(f, h, 2);
  SpectralScalar q = oracle::product(f, h);
  CHECK(oracle::max_rel_err(p, q) < 1e-12);

  // f * 1 = f
  SpectralScalar one = SpectralScalar::zeros(g);
  one.c[0] = Complex(1.0, 0.0);
  SpectralScalar fp = pointwise_product(f, one, 2);
  double dev = 0.0;
  for (size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(fp.c[i] - f.c[i]));
  CHECK(dev < 1e-14);
}

TEST_CASE("unpadded lattice products keep the Nyquist row intact", "[spectral]") {
  GridSpec g = make_grid(2, 8, 2 * pi, Dealias::none);
  SpectralScalar f = SpectralScalar::zeros(g);
  std::array<int, 3> jn{4, 0, 0};  // unpaired mode on the raw lattice
  f.c[flatten(g, jn)] = Complex(1.0, 0.0);
  f.c[flatten(g, {0, 3, 0})] = Complex(0.5, 0.25);
  f.c[flatten(g, {0, 5, 0})] = Complex(0.5, -0.25);
  SpectralScalar one = SpectralScalar::zeros(g);
  one.c[0] = Complex(1.0, 0.0);
  SpectralScalar fp = pointwise_product(f, one, 2);
  double dev = 0.0;
  for (size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(fp.c[i] - f.c[i]));
  CHECK(dev < 1e-14);
}

TEST_CASE("dealias bands are enforced by the product", "[spectral]") {
  for (Dealias da : {Dealias::one_half, Dealias::two_thirds}) {
    GridSpec g = make_grid(2, 12, 2 * pi, da);
    Spectrum sp{};
    SpectralScalar f = random_band_limited(g, sp, 3);
    SpectralScalar p = pointwise_product(f, f, 2);
    const int bl = g.band_limit();
    for (size_t i = 0; i < g.size(); ++i) {
      auto j = unflatten(g, i);
      bool outside = false;
      for (int a = 0; a < g.d; ++a)
        if (std::abs(g.signed_index(j[a])) > bl) outside = true;
      if (outside) CHECK(std::abs(p.c[i]) == 0.0);
    }
  }
}

TEST_CASE("parseval and collocation norms", "[spectral]") {
  GridSpec g = make_grid(2, 16, 2 * pi, Dealias::one_half);
  SpectralScalar c1 = single_cos(g, 0);  // cos(x1), volume 4 pi^2
  CHECK(l2_norm_sq(c1) == Approx(2 * pi * pi).epsilon(1e-13));
  CHECK(lp_norm(c1, 2) == Approx(std::sqrt(2.0) * pi).epsilon(1e-12));
  // ||cos||_4^4 = vol * 3/8
  CHECK(std::pow(lp_norm(c1, 4), 4) == Approx(4 * pi * pi * 3.0 / 8.0).epsilon(1e-12));
  CHECK(linf_norm(c1) == Approx(1.0).epsilon(1e-13));
  CHECK(mean(c1) == Approx(0.0).margin(1e-15));

  Spectrum sp{};
  SpectralScalar f = random_band_limited(g, sp, 11);
  CHECK(lp_norm(f, 2) == Approx(l2_norm(f)).epsilon(1e-12));
}

TEST_CASE("fractional multipliers compose and guard the zero mode", "[spectral]") {
  GridSpec g = make_grid(2, 16, 2 * pi, Dealias::one_half);
  Spectrum sp{};
  SpectralScalar f = random_band_limited(g, sp, 5);
  SpectralScalar a = apply_lambda(apply_lambda(f, 0.7), -0.2);
  SpectralScalar b = apply_lambda(f, 0.5);
  double dev = 0.0;
  for (size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(a.c[i] - b.c[i]));
  CHECK(dev < 1e-13);

  // single mode |k| = 2: negative order scales by 1/2
  SpectralScalar m2 = SpectralScalar::zeros(g);
  m2.c[flatten(g, {2, 0, 0})] = Complex(0.5, 0.0);
  m2.c[flatten(g, {14, 0, 0})] = Complex(0.5, 0.0);
  SpectralScalar half = apply_lambda(m2, -1.0);
  CHECK(std::abs(half.c[flatten(g, {2, 0, 0})]) == Approx(0.25).epsilon(1e-14));

  SpectralScalar with_mean = f;
  with_mean.c[0] = Complex(1.0, 0.0);
  CHECK_THROWS_AS(apply_lambda(with_mean, -0.5), NegativeOrderOnNonzeroMean);
  CHECK_NOTHROW(apply_lambda(with_mean, 1.0));
}

TEST_CASE("multi-index enumeration and derivatives", "[spectral]") {
  // sum of multinomial weights over |gamma| = k is d^k
  for (int d : {2, 3})
    for (int k : {1, 2, 3}) {
      double total = 0.0;
      for (const auto& gamma : multi_indices(d, k)) total += multinomial_weight(gamma);
      CHECK(total == Approx(std::pow(d, k)));
    }

  GridSpec g = make_grid(2, 16, 2 * pi, Dealias::one_half);
  Spectrum sp{};
  SpectralScalar f = random_band_limited(g, sp, 9);
  std::array<int, 3> gamma{2, 1, 0};
  SpectralScalar via_multi = apply_multi_derivative(f, gamma);
  SpectralScalar via_chain = partial_derivative(partial_derivative(partial_derivative(f, 0), 0), 1);
  double dev = 0.0;
  for (size_t i = 0; i < g.size(); ++i)
    dev = std::max(dev, std::abs(via_multi.c[i] - via_chain.c[i]));
  CHECK(dev < 1e-13);
}

TEST_CASE("random fields are real, mean-free, band-limited, reproducible", "[spectral]") {
  for (int d : {2, 3}) {
    GridSpec g = make_grid(d, d == 2 ? 16 : 8, 2 * pi, Dealias::one_half);
    Spectrum sp = Spectrum::parse("power:-1.0");
    SpectralScalar f = random_band_limited(g, sp, 1234);
    CHECK(is_real_field(f));
    CHECK(std::abs(f.c[0]) == 0.0);
    SpectralScalar cut = f;
    band_limit(cut, g.band_limit());
    double chopped = 0.0;
    for (size_t i = 0; i < g.size(); ++i) chopped = std::max(chopped, std::abs(cut.c[i] - f.c[i]));
    CHECK(chopped == 0.0);
    SpectralScalar f2 = random_band_limited(g, sp, 1234);
    double dev = 0.0;
    for (size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(f.c[i] - f2.c[i]));
    CHECK(dev == 0.0);
    SpectralScalar f3 = random_band_limited(g, sp, 1235);
    double diff = 0.0;
    for (size_t i = 0; i < g.size(); ++i) diff = std::max(diff, std::abs(f.c[i] - f3.c[i]));
    CHECK(diff > 1e-6);
  }
}

TEST_CASE("divergence and gradient are adjoint up to sign", "[spectral]") {
  GridSpec g = make_grid(2, 16, 2 * pi, Dealias::one_half);
  Spectrum sp{};
  SpectralVector v = SpectralVector::zeros(g);
  for (int a = 0; a < g.d; ++a) v.comp[a] = random_band_limited(g, sp, 50 + a);
  SpectralScalar f = random_band_limited(g, sp, 60);
  // <div v, f> = -<v, grad f>
  double lhs = inner_product_l2(divergence(v), f);
  SpectralVector gf = gradient(f);
  double rhs = 0.0;
  for (int a = 0; a < g.d; ++a) rhs += inner_product_l2(v.comp[a], gf.comp[a]);
  CHECK(lhs == Approx(-rhs).epsilon(1e-12));
}

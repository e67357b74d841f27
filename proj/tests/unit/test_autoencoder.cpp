#include <doctest.h>

#include <random>

#include "reptex/autoencoder.hpp"

using namespace reptex::nn;

namespace {

Architecture toy() {
    Architecture a;
    a.input_size = 4;
    a.channels = 3;
    a.conv1 = 3;
    a.conv2 = 4;
    a.embed_dim = 5;
    a.deconv1 = 4;
    a.deconv2 = 3;
    return a;
}

struct GradCheck {
    double max_rel = 0.0;
    std::size_t checked = 0;
};

// Central differences on every parameter against backward().
GradCheck grad_check(const Architecture& a, std::uint64_t seed, int batch) {
    using Net = ConvAutoencoder<double>;
    Net net(a);
    Params<double> p = initial_parameters<double>(a, seed);
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const int area = a.input_size * a.input_size;
    Net::Mat input(a.channels, batch * area), target(a.channels, batch * area);
    for (Eigen::Index i = 0; i < input.size(); ++i) {
        input.data()[i] = u(gen);
        target.data()[i] = u(gen);
    }
    // Small positive biases keep ReLUs away from their kink.
    for (double& v : p) v += 0.01;

    Params<double> grad;
    net.reconstruct(p, input, batch);
    net.backward(p, target, batch, grad);

    GradCheck out;
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + h;
        net.reconstruct(p, input, batch);
        const double up = net.loss(target);
        p[i] = keep - h;
        net.reconstruct(p, input, batch);
        const double down = net.loss(target);
        p[i] = keep;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
        out.max_rel = std::max(out.max_rel, std::abs(numeric - grad[i]) / scale);
        ++out.checked;
    }
    return out;
}

} // namespace

TEST_SUITE("autoencoder") {

TEST_CASE("default layout has the documented sizes") {
    const Architecture a;
    const auto shapes = layer_shapes(a);
    REQUIRE(shapes.size() == kLayerCount);
    CHECK(a.flat_size() == 32 * 8 * 8);
    CHECK(shapes[kEncFc].rows == 64);
    CHECK(shapes[kEncFc].cols == 2048);
    CHECK(parameter_count(a) == 283267);
}

TEST_CASE("initial parameters are finite and seed-determined") {
    const Architecture a;
    const auto p1 = initial_parameters<float>(a, 5);
    const auto p2 = initial_parameters<float>(a, 5);
    const auto p3 = initial_parameters<float>(a, 6);
    CHECK(p1 == p2);
    CHECK(p1 != p3);
    for (float v : p1) CHECK(std::isfinite(v));
}

TEST_CASE("backpropagation matches central differences on a 4x4 toy network") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const GradCheck g = grad_check(toy(), seed, 2);
        INFO("seed " << seed << " max relative error " << g.max_rel);
        CHECK(g.checked == parameter_count(toy()));
        CHECK(g.max_rel <= 1e-4);
    }
}

TEST_CASE("gather and scatter are adjoint") {
    // <gather(x), y> == <x, scatter(y)> for the stride-2 3x3 patch layout.
    std::mt19937 gen(4);
    std::normal_distribution<double> n;
    const int c = 2, side = 8, batch = 2, small = side / 2;
    std::vector<double> x(static_cast<std::size_t>(c) * batch * side * side);
    for (double& v : x) v = n(gen);
    std::vector<double> cols(9 * static_cast<std::size_t>(c) * batch * small * small);
    gather_patches<double>(x.data(), c, side, batch, cols.data());
    std::vector<double> y(cols.size());
    for (double& v : y) v = n(gen);
    std::vector<double> back(x.size(), 0.0);
    scatter_patches<double>(y.data(), c, side, batch, back.data());
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += cols[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * back[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("adam reduces a quadratic") {
    Params<double> p{3.0, -2.0};
    Adam<double> opt(2, 0.1);
    for (int i = 0; i < 500; ++i) {
        Params<double> g{2 * p[0], 2 * p[1]};
        opt.step(p, g);
    }
    CHECK(std::abs(p[0]) < 1e-2);
    CHECK(std::abs(p[1]) < 1e-2);
}

}

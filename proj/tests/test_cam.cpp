#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "asc/cam.hpp"
#include "asc/network.hpp"
#include "gradcheck.hpp"

using namespace asc;
using namespace asc::testing;

namespace {

LogMelImage random_feature(std::size_t t, std::size_t m, Rng& rng) {
    LogMelImage img(t, m);
    for (double& x : img.v) x = rng.uniform(-1.0, 1.0);
    return img;
}

double cosine(const Matrix& a, const Matrix& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        dot += a.v[i] * b.v[i];
        na += a.v[i] * a.v[i];
        nb += b.v[i] * b.v[i];
    }
    return dot / std::sqrt(na * nb);
}

// minimal GAP-headed stack: an eval-mode dropout acts as an identity
// "trunk", so the retained maps equal the network input
Network direct_gap_net(std::size_t channels, std::size_t h, std::size_t w, std::size_t classes) {
    std::vector<std::unique_ptr<Layer>> l;
    l.push_back(std::make_unique<Dropout>(0.5));
    l.push_back(std::make_unique<GlobalAvgPool>());
    l.push_back(std::make_unique<Linear>(channels, classes));
    l.push_back(std::make_unique<Softmax>());
    return Network({channels, h, w}, std::move(l), 0);
}

}  // namespace

TEST_CASE("cam_gap on a hand-built head") {
    SUBCASE("zero feature maps give a zero map") {
        Network net = direct_gap_net(2, 3, 4, 5);
        Tensor x({1, 2, 3, 4});
        net.forward_batch(x, true);
        const Cam cam = cam_gap(net, 1);
        CHECK(cam.map.rows == 3);
        CHECK(cam.map.cols == 4);
        for (double v : cam.map.v) CHECK(v == 0.0);
        CHECK(cam.pixel_count == 12);
    }

    SUBCASE("K=1, w=2, constant map 3 gives a constant map 6") {
        Network net = direct_gap_net(1, 2, 2, 2);
        auto& head = static_cast<Linear&>(net.layer(2));
        head.weight().v = {2.0, -1.0};  // class 0 weight 2, class 1 weight -1
        Tensor x({1, 1, 2, 2});
        x.fill(3.0);
        net.forward_batch(x, true);
        const Cam cam = cam_gap(net, 0);
        for (double v : cam.map.v) CHECK(v == doctest::Approx(6.0).epsilon(1e-12));
        const Cam neg = cam_gap(net, 1);
        for (double v : neg.map.v) CHECK(v == doctest::Approx(-3.0).epsilon(1e-12));
    }

    SUBCASE("mean of the map plus bias reconstructs the logit") {
        Network net = Network::cnn_gap(5, 32, 32, 3);
        Rng rng(7);
        net.forward(random_feature(32, 32, rng), true);
        const std::size_t g = net.gap_layer();
        const auto& head = static_cast<const Linear&>(net.layer(g + 1));
        for (int c = 0; c < 5; ++c) {
            const Cam cam = cam_gap(net, c);
            double mean = 0.0;
            for (double v : cam.map.v) mean += v;
            mean /= static_cast<double>(cam.map.v.size());
            CHECK(std::abs(mean + head.bias().v[c] - net.logits().v[c]) < 1e-9);
        }
    }

    SUBCASE("errors: non-GAP network, missing cache") {
        Network fc = Network::cnn_fc(4, 32, 32, 0);
        Rng rng(9);
        fc.forward(random_feature(32, 32, rng), true);
        CHECK_THROWS_AS(cam_gap(fc, 0), Error);

        Network gap = Network::cnn_gap(4, 32, 32, 0);
        CHECK_THROWS_AS(cam_gap(gap, 0), Error);  // no forward yet
    }
}

TEST_CASE("grad_cam") {
    SUBCASE("matches cam_gap scaled by 1/Z at the last trunk activation") {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            Network net = Network::cnn_gap(6, 32, 32, seed);
            Rng rng(100 + seed);
            net.forward(random_feature(32, 32, rng), true);

            const int cls = static_cast<int>(seed % 6);
            const Cam cam = cam_gap(net, cls);
            const Cam gcam = grad_cam(net, cls, net.trunk_output_layer());
            REQUIRE(cam.map.v.size() == gcam.map.v.size());
            CHECK(cosine(cam.map, gcam.map) >= 1.0 - 1e-9);

            const double z = static_cast<double>(cam.pixel_count);
            double max_abs = 0.0;
            for (double v : cam.map.v) max_abs = std::max(max_abs, std::abs(v));
            REQUIRE(max_abs > 0.0);
            for (std::size_t i = 0; i < cam.map.v.size(); ++i)
                CHECK(std::abs(gcam.map.v[i] * z - cam.map.v[i]) <= 1e-8 * max_abs);
        }
    }

    SUBCASE("zero input to a zero-headed net gives a zero map") {
        Network net = direct_gap_net(3, 4, 4, 2);
        for (Tensor* p : net.layer(2).params()) p->fill(0.0);
        Tensor x({1, 3, 4, 4});
        net.forward_batch(x, true);
        const Cam cam = grad_cam(net, 0, 0);
        for (double v : cam.map.v) CHECK(v == 0.0);
    }

    SUBCASE("doubling the feature maps doubles the map under a fixed head") {
        Network net = direct_gap_net(3, 4, 4, 2);
        Rng rng(11);
        Tensor x = random_tensor({1, 3, 4, 4}, rng);
        net.forward_batch(x, true);
        const Cam base = grad_cam(net, 1, 0);

        Tensor x2 = x;
        for (double& v : x2.v) v *= 2.0;
        net.forward_batch(x2, true);
        const Cam doubled = grad_cam(net, 1, 0);
        for (std::size_t i = 0; i < base.map.v.size(); ++i)
            CHECK(doubled.map.v[i] == doctest::Approx(2.0 * base.map.v[i]).epsilon(1e-10));
    }

    SUBCASE("works on the FC architecture at any conv activation") {
        Network fc = Network::cnn_fc(4, 32, 32, 13);
        Rng rng(17);
        fc.forward(random_feature(32, 32, rng), true);
        const Cam cam = grad_cam(fc, 2, fc.trunk_output_layer());
        CHECK(cam.map.rows == 3);  // 32 -> 15 -> 7 -> 3
        CHECK(cam.map.cols == 3);
        CHECK(cam.channel_weights.size() == 256);
        // earlier tap: the second pool output
        std::size_t second_pool = 0, seen = 0;
        for (std::size_t i = 0; i < fc.layer_count(); ++i)
            if (fc.layer(i).kind() == LayerKind::max_pool && ++seen == 2) second_pool = i;
        const Cam cam2 = grad_cam(fc, 2, second_pool);
        CHECK(cam2.map.rows == 7);
        CHECK(cam2.channel_weights.size() == 192);
    }

    SUBCASE("invalid layer index is rejected") {
        Network net = direct_gap_net(3, 4, 4, 2);
        Tensor x({1, 3, 4, 4});
        net.forward_batch(x, true);
        CHECK_THROWS_AS(grad_cam(net, 0, 99), Error);
        CHECK_THROWS_AS(grad_cam(net, 0, 2), Error);  // linear output is not spatial
    }
}

TEST_CASE("cam linearity in the head weights") {
    Network net = direct_gap_net(4, 5, 6, 3);
    auto& head = static_cast<Linear&>(net.layer(2));
    Rng rng(19);
    Tensor x = random_tensor({1, 4, 5, 6}, rng);

    std::vector<double> w1(4), w2(4);
    for (int i = 0; i < 4; ++i) {
        w1[i] = rng.uniform(-1.0, 1.0);
        w2[i] = rng.uniform(-1.0, 1.0);
    }

    auto cam_with = [&](const std::vector<double>& w) {
        for (int i = 0; i < 4; ++i) head.weight().v[i] = w[i];
        net.forward_batch(x, true);
        return cam_gap(net, 0);
    };

    const Cam c1 = cam_with(w1);
    const Cam c2 = cam_with(w2);
    std::vector<double> wsum(4);
    for (int i = 0; i < 4; ++i) wsum[i] = w1[i] + w2[i];
    const Cam csum = cam_with(wsum);
    for (std::size_t i = 0; i < csum.map.v.size(); ++i)
        CHECK(std::abs(csum.map.v[i] - (c1.map.v[i] + c2.map.v[i])) < 1e-10);
}

TEST_CASE("upsample_bilinear") {
    SUBCASE("identity when sizes match") {
        Rng rng(23);
        Matrix m(4, 5);
        for (double& v : m.v) v = rng.normal();
        const Matrix up = upsample_bilinear(m, 4, 5);
        for (std::size_t i = 0; i < m.v.size(); ++i)
            CHECK(up.v[i] == doctest::Approx(m.v[i]).epsilon(1e-12));
    }

    SUBCASE("constant maps stay constant and corners are preserved") {
        Matrix m(3, 3, 2.5);
        const Matrix up = upsample_bilinear(m, 10, 12);
        for (double v : up.v) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));

        Matrix c(2, 2);
        c.at(0, 0) = 1.0;
        c.at(0, 1) = 2.0;
        c.at(1, 0) = 3.0;
        c.at(1, 1) = 4.0;
        const Matrix u = upsample_bilinear(c, 7, 9);
        CHECK(u.at(0, 0) == doctest::Approx(1.0));
        CHECK(u.at(0, 8) == doctest::Approx(2.0));
        CHECK(u.at(6, 0) == doctest::Approx(3.0));
        CHECK(u.at(6, 8) == doctest::Approx(4.0));
    }
}

TEST_CASE("render_overlay") {
    Rng rng(29);
    const LogMelImage img = random_feature(20, 16, rng);

    SUBCASE("zero map reproduces the grayscale base exactly") {
        Cam cam;
        cam.map = Matrix(5, 4, 0.0);
        const OverlayImage overlay = render_overlay(img, cam, 0.4);
        const OverlayImage gray = render_grayscale(img);
        REQUIRE(overlay.rgb.size() == gray.rgb.size());
        for (std::size_t i = 0; i < overlay.rgb.size(); ++i) CHECK(overlay.rgb[i] == gray.rgb[i]);
    }

    SUBCASE("uniformly positive map pushes red, never below the base") {
        Cam cam;
        cam.map = Matrix(5, 4, 1.0);
        const OverlayImage overlay = render_overlay(img, cam, 0.4);
        const OverlayImage gray = render_grayscale(img);
        for (std::size_t i = 0; i < overlay.rgb.size(); i += 3) {
            CHECK(overlay.rgb[i] >= gray.rgb[i]);          // red grows
            CHECK(overlay.rgb[i + 1] <= gray.rgb[i + 1]);  // green shrinks
            CHECK(overlay.rgb[i + 2] <= gray.rgb[i + 2]);  // blue shrinks
            CHECK(overlay.rgb[i] >= overlay.rgb[i + 1]);
            CHECK(overlay.rgb[i + 1] == overlay.rgb[i + 2]);
        }
    }

    SUBCASE("negative map blends toward blue") {
        Cam cam;
        cam.map = Matrix(5, 4, -2.0);
        const OverlayImage overlay = render_overlay(img, cam, 0.5);
        for (std::size_t i = 0; i < overlay.rgb.size(); i += 3)
            CHECK(overlay.rgb[i + 2] >= overlay.rgb[i]);
    }

    SUBCASE("output dims follow the upsampled feature image") {
        // the coarse trunk-resolution map is upsampled to the input size
        Cam cam;
        cam.map = Matrix(11, 15, 0.5);
        LogMelImage big(100, 128, 1.0);
        big.at(3, 7) = 2.0;
        const OverlayImage overlay = render_overlay(big, cam, 0.4);
        CHECK(overlay.width == 100);
        CHECK(overlay.height == 128);
    }

    SUBCASE("alpha outside [0,1] is rejected") {
        Cam cam;
        cam.map = Matrix(2, 2, 0.0);
        CHECK_THROWS_AS(render_overlay(img, cam, 1.5), Error);
    }
}

TEST_CASE("event_activation_report") {
    LogMelImage img(10, 10);
    // top-right quarter is high energy
    for (std::size_t t = 0; t < 10; ++t)
        for (std::size_t m = 0; m < 10; ++m)
            img.at(t, m) = (t >= 5 && m >= 5) ? 10.0 : 0.0;

    SUBCASE("uniform cam gives ratio 1") {
        Cam cam;
        cam.map = Matrix(10, 10, 0.7);
        const auto rep = event_activation_report(img, cam, 0.7);
        CHECK(rep.ratio == doctest::Approx(1.0));
    }

    SUBCASE("uniform zero cam also gives ratio 1") {
        Cam cam;
        cam.map = Matrix(10, 10, 0.0);
        const auto rep = event_activation_report(img, cam, 0.7);
        CHECK(rep.ratio == doctest::Approx(1.0));
    }

    SUBCASE("cam active only off the high-energy set gives ratio 0") {
        Cam cam;
        cam.map = Matrix(10, 10, 0.0);
        for (std::size_t t = 0; t < 5; ++t)
            for (std::size_t m = 0; m < 5; ++m) cam.map.at(t, m) = 3.0;
        const auto rep = event_activation_report(img, cam, 0.7);
        CHECK(rep.high_energy_mean == 0.0);
        CHECK(rep.rest_mean > 0.0);
        CHECK(rep.ratio == 0.0);
    }
}

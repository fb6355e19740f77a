#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scar/preprocess.hpp"
#include "scar/types.hpp"

#include <cstdio>
#include <filesystem>

using namespace scar;

TEST_CASE("histogram basic shape") {
    CqiReport r{0, 0, {3, 3, 7, 9}};
    const Vector h = histogram(r, 15);
    CHECK(h.size() == 15);
    CHECK(h[2] == doctest::Approx(0.5));
    CHECK(h[6] == doctest::Approx(0.25));
    CHECK(h[8] == doctest::Approx(0.25));
    CHECK(h.sum() == doctest::Approx(1.0).epsilon(1e-12));

    CqiReport constant{1, 0, {5, 5, 5, 5, 5, 5}};
    const Vector one_hot = histogram(constant, 15);
    CHECK(one_hot[4] == doctest::Approx(1.0));
    CHECK(one_hot.sum() == doctest::Approx(1.0));
}

TEST_CASE("histogram contract violations") {
    CHECK_THROWS(histogram(CqiReport{0, 0, {}}, 15));
    CHECK_THROWS(histogram(CqiReport{0, 0, {0}}, 15));
    CHECK_THROWS(histogram(CqiReport{0, 0, {16}}, 15));
    CHECK_THROWS(histogram(CqiReport{0, 0, {1}}, 0));
}

TEST_CASE("top-m reduction worked example") {
    Vector h = Vector::Zero(15);
    h[2] = 0.5;
    h[6] = 0.25;
    h[8] = 0.25;
    const TopMVector t = top_m_reduce(h, 2);
    // bins 7 and 9 tie on value; lower index 7 is kept, bin 9's mass moves to it
    CHECK(t.bins[2] == doctest::Approx(0.5));
    CHECK(t.bins[6] == doctest::Approx(0.5));
    CHECK(t.bins[8] == doctest::Approx(0.0));
    CHECK(t.bins.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.m == 2);
}

TEST_CASE("top-m equidistant mass moves to the lower index") {
    Vector h = Vector::Zero(15);
    h[1] = 0.25;
    h[4] = 0.25;
    h[7] = 0.25;
    h[10] = 0.25;
    const TopMVector t = top_m_reduce(h, 2);
    // kept: 2 and 5 (1-based); bin 8 is equidistant from both kept bins? no:
    // |7-1|=6, |7-4|=3 so it joins bin 5; bin 11 joins bin 5 as well (|10-4|=6 < |10-1|=9)
    CHECK(t.bins[1] == doctest::Approx(0.25));
    CHECK(t.bins[4] == doctest::Approx(0.75));
    CHECK(t.bins.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("top-m exact equidistant tie") {
    Vector h = Vector::Zero(7);
    h[0] = 0.4;
    h[4] = 0.4;
    h[2] = 0.2; // exactly between kept bins 1 and 5
    const TopMVector t = top_m_reduce(h, 2);
    CHECK(t.bins[0] == doctest::Approx(0.6));
    CHECK(t.bins[4] == doctest::Approx(0.4));
}

TEST_CASE("top-m identity when already sparse enough") {
    Vector h = Vector::Zero(15);
    h[3] = 0.9;
    h[12] = 0.1;
    const TopMVector t = top_m_reduce(h, 3);
    CHECK((t.bins.array() == h.array()).all());
    CHECK(t.m == 3);
}

TEST_CASE("top-m reduction invariants under fuzzing") {
    Rng rng(123);
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 15;
        const int j = 1 + static_cast<int>(rng.uniform_below(24));
        CqiReport r{0, 0, {}};
        for (int i = 0; i < j; ++i)
            r.values.push_back(1 + static_cast<int>(rng.uniform_below(n)));
        const Vector h = histogram(r, n);
        const int m = 1 + static_cast<int>(rng.uniform_below(5));
        const TopMVector t = top_m_reduce(h, m);

        int nonzero = 0;
        for (int i = 0; i < n; ++i) {
            CHECK(t.bins[i] >= 0.0);
            if (t.bins[i] > 0.0) ++nonzero;
        }
        CHECK(nonzero <= m);
        CHECK(t.bins.sum() == doctest::Approx(h.sum()).epsilon(1e-12));

        // applying the reduction again changes nothing
        const TopMVector again = top_m_reduce(t.bins, m);
        CHECK((again.bins.array() == t.bins.array()).all());

        // duplicating every RB entry leaves the histogram unchanged
        CqiReport doubled = r;
        doubled.values.insert(doubled.values.end(), r.values.begin(), r.values.end());
        const Vector h2 = histogram(doubled, n);
        CHECK((h2 - h).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("top-m contract violations") {
    Vector h = Vector::Zero(4);
    h[0] = 1.0;
    CHECK_THROWS(top_m_reduce(h, 0));
    Vector bad = h;
    bad[1] = -0.1;
    CHECK_THROWS(top_m_reduce(bad, 2));
}

TEST_CASE("dataset file round trip") {
    Dataset ds;
    ds.n_levels = 5;
    ds.m = 2;
    ds.points.resize(3, 5);
    ds.points << 0.5, 0.5, 0, 0, 0,
                 0, 1.0 / 3.0, 0, 2.0 / 3.0, 0,
                 0.1234567890123456, 0, 0, 0, 0.8765432109876544;
    const std::string path =
        (std::filesystem::temp_directory_path() / "scar_test_dataset.txt").string();
    save_dataset(path, ds);
    const Dataset back = load_dataset(path);
    CHECK(back.n_levels == ds.n_levels);
    CHECK(back.m == ds.m);
    REQUIRE(back.points.rows() == ds.points.rows());
    CHECK((back.points.array() == ds.points.array()).all()); // %.17g round-trips doubles exactly
    std::remove(path.c_str());
}

TEST_CASE("dataset loader rejects malformed files") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "scar_bad_dataset.txt").string();
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("# wrong header\n1 0.5 0.5\n", f);
        std::fclose(f);
    }
    CHECK_THROWS(load_dataset(path));
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("# scar-dataset v1 N=3 M=2\n1 0.5 0.5 0\n", f);
        std::fclose(f);
    }
    CHECK_THROWS(load_dataset(path)); // record M disagrees with header
    std::remove(path.c_str());
}

#include <doctest.h>

#include "stencilstream/analysis.hpp"
#include "stencilstream/error.hpp"

#include <cmath>
#include <algorithm>
#include <set>
#include <sstream>

using namespace stencilstream;

TEST_CASE("splitmix64 reference stream") {
    SplitMix64 rng(1234567);
    const std::uint64_t expect[] = {6457827717110365317ull, 3203168211198807973ull, 9817491932198370423ull,
                                    4593380528125082431ull, 16408922859458223821ull};
    for (auto e : expect) CHECK(rng.next() == e);

    SplitMix64 a(5), b(5);
    for (int k = 0; k < 1000; ++k) {
        const auto bound = static_cast<std::uint64_t>(k % 97 + 1);
        const auto v = a.below(bound);
        CHECK(v < bound);
        CHECK(v == b.below(bound));
    }
    CHECK(SplitMix64(9).split(3).next() == SplitMix64(9).split(3).next());
    CHECK(SplitMix64(9).split(3).next() != SplitMix64(9).split(4).next());
}

TEST_CASE("sample counts and uniqueness") {
    const auto big = sample_points({1152, 1152, 1152, 4}, 100, 7);
    CHECK(big.points.size() == 115200);
    const auto desk = sample_points({144, 144, 144, 4}, 100, 7);
    CHECK(desk.points.size() == 14400);

    std::set<std::tuple<int, int, int>> seen;
    for (const auto& p : desk.points) {
        CHECK(p.x >= 0);
        CHECK(p.x < 144);
        CHECK(p.y >= 0);
        CHECK(p.y < 144);
        seen.insert({p.x, p.y, p.z});
    }
    CHECK(seen.size() == desk.points.size());
    for (int z = 0; z < 144; ++z) CHECK(seen.count({desk.points[static_cast<std::size_t>(z) * 100].x,
                                                     desk.points[static_cast<std::size_t>(z) * 100].y, z}) == 1);

    // Whole plane: every position exactly once.
    const auto full = sample_points({5, 3, 2, 4}, 15, 1);
    std::set<std::tuple<int, int, int>> all;
    for (const auto& p : full.points) all.insert({p.x, p.y, p.z});
    CHECK(all.size() == 30);

    CHECK_THROWS_AS(sample_points({4, 4, 4, 4}, 17, 1), Error);
    CHECK_THROWS_AS(sample_points({4, 4, 4, 4}, 0, 1), Error);
}

TEST_CASE("sampling is deterministic per seed and plane") {
    const GridSpec spec{64, 64, 32, 4};
    const auto a = sample_points(spec, 50, 11);
    const auto b = sample_points(spec, 50, 11);
    const auto c = sample_points(spec, 50, 12);
    CHECK(a.points == b.points);
    CHECK(a.points != c.points);
    // Plane streams do not depend on how many planes exist.
    const auto shorter = sample_points({64, 64, 8, 4}, 50, 11);
    CHECK(std::equal(shorter.points.begin(), shorter.points.end(), a.points.begin()));
}

TEST_CASE("single draws are close to uniform") {
    const GridSpec spec{4, 4, 16000, 4};
    const auto s = sample_points(spec, 1, 3);
    std::array<int, 16> counts{};
    for (const auto& p : s.points) ++counts[static_cast<std::size_t>(p.x + 4 * p.y)];
    double chi2 = 0.0;
    for (int n : counts) chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
    CHECK(chi2 < 37.7);  // 15 dof, p = 0.001
}

TEST_CASE("relative error metric") {
    const GridSpec spec{16, 16, 8, 4};
    const Volume ref = make_volume(spec, SmoothSinusoid{1, 1, 1});
    const auto samples = sample_points(spec, 20, 4);

    const auto same = relative_error(ref, ref, samples);
    CHECK(same.avg_rel_error == 0.0);
    CHECK(same.samples == 160);
    CHECK(same.skipped == 0);

    Volume scaled = ref;
    for (double& v : scaled.values()) v *= 1.0 + 1e-6;
    CHECK(relative_error(ref, scaled, samples).avg_rel_error == doctest::Approx(1e-6).epsilon(1e-12 / 1e-6));

    const std::vector<double> r = {1.0, 2.0, 0.0, -4.0, 1e-31};
    const std::vector<double> c = {1.5, 2.0, 3.0, -3.0, 5.0};
    const auto e = relative_error(r, c);
    CHECK(e.samples == 5);
    CHECK(e.skipped == 2);
    CHECK(e.avg_rel_error == doctest::Approx((0.5 + 0.0 + 0.25) / 3.0));
    CHECK(e.flagged());

    const std::vector<double> mismatched = {1.0};
    CHECK_THROWS_AS(relative_error(r, mismatched), Error);

    const auto values = sample_values(ref, samples);
    REQUIRE(values.size() == samples.points.size());
    CHECK(values[7] == ref.at(samples.points[7].x, samples.points[7].y, samples.points[7].z));
}

TEST_CASE("flag threshold is one percent") {
    ErrorReport r;
    r.samples = 1000;
    r.skipped = 9;
    CHECK(!r.flagged());
    r.skipped = 10;
    CHECK(r.flagged());
}

TEST_CASE("breakdown bounds") {
    auto ev = [](Stage s, std::int64_t a, std::int64_t b, int block = 0) {
        return StageEvent{0, block, s, stage_lane(s), a, b, 0};
    };
    SUBCASE("serial log: wall equals the sum") {
        const std::vector<StageEvent> log = {ev(Stage::upload, 0, 100), ev(Stage::decompress, 100, 150),
                                             ev(Stage::compute, 150, 400), ev(Stage::compress, 400, 420),
                                             ev(Stage::download, 420, 500)};
        const auto b = breakdown_from_events(log);
        CHECK(b.wall == doctest::Approx(500e-9));
        CHECK(b.sum() == doctest::Approx(b.wall));
        CHECK(b[Category::compute] == doctest::Approx(250e-9));
        CHECK(b.bounding() == Category::compute);
    }
    SUBCASE("full overlap: wall equals the largest category") {
        const std::vector<StageEvent> log = {ev(Stage::upload, 0, 300, 2), ev(Stage::compute, 0, 300, 1),
                                             ev(Stage::download, 0, 300, 0)};
        const auto b = breakdown_from_events(log);
        CHECK(b.wall == doctest::Approx(300e-9));
        CHECK(b.sum() == doctest::Approx(900e-9));
        CHECK(b.makespan == doctest::Approx(300e-9));
    }
    SUBCASE("gaps are excluded from wall but not from makespan") {
        const std::vector<StageEvent> log = {ev(Stage::upload, 0, 100), ev(Stage::compute, 200, 300)};
        const auto b = breakdown_from_events(log);
        CHECK(b.wall == doctest::Approx(200e-9));
        CHECK(b.makespan == doctest::Approx(300e-9));
        CHECK(b.bounding() == Category::upload);
    }
    SUBCASE("overlap within a lane is an error") {
        const std::vector<StageEvent> log = {ev(Stage::upload, 0, 100, 0), ev(Stage::upload, 50, 120, 1)};
        CHECK_THROWS_AS(breakdown_from_events(log), Error);
    }
}

TEST_CASE("spearman rank correlation") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const std::vector<double> up = {0.1, 0.4, 0.5, 2.0, 9.0};
    const std::vector<double> down = {5, 4, 3, 2, 1};
    CHECK(spearman(x, up) == doctest::Approx(1.0));
    CHECK(spearman(x, down) == doctest::Approx(-1.0));

    const std::vector<double> tx = {1, 2, 2, 3};
    const std::vector<double> ty = {1, 3, 2, 4};
    CHECK(spearman(tx, ty) == doctest::Approx(3.0 / std::sqrt(10.0)));

    const std::vector<double> flat = {2, 2, 2, 2, 2};
    CHECK(std::isnan(spearman(x, flat)));
    CHECK(std::isnan(spearman(std::vector<double>{1.0}, std::vector<double>{1.0})));

    // Rank correlation is invariant under monotone transforms.
    std::vector<double> a, b;
    for (int k = 0; k < 40; ++k) {
        a.push_back(std::sin(k * 1.3));
        b.push_back(std::cos(k * 0.7));
    }
    std::vector<double> ea;
    for (double v : a) ea.push_back(std::exp(3 * v));
    CHECK(spearman(a, b) == doctest::Approx(spearman(ea, b)));
}

TEST_CASE("csv writers") {
    std::ostringstream errors;
    const std::vector<ErrorReport> rows = {{48, "rw32", 0.25, 0, 100}, {96, "rw32", 0.0, 3, 100}};
    write_error_csv(errors, rows);
    CHECK(errors.str() == "mode,total_steps,avg_rel_error,skipped\nrw32,48,0.25,0\nrw32,96,0,3\n");

    std::ostringstream br;
    Breakdown b;
    b.seconds = {1, 2, 3, 4, 5};
    b.wall = 6;
    write_breakdown_csv(br, "baseline", b);
    std::istringstream in(br.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "mode,category,seconds");
    std::getline(in, line);
    CHECK(line == "baseline,upload,1.000000000");
    int rows_left = 0;
    while (std::getline(in, line)) ++rows_left;
    CHECK(rows_left == 4 + 2 + 3);
}

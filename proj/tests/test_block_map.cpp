#include <doctest.h>

#include "stencilstream/block_map.hpp"
#include "stencilstream/error.hpp"

#include <string>
#include <vector>

using namespace stencilstream;

namespace {

// Every padded plane must belong to exactly one R_i or C_i.
void check_partition(const BlockMap& map) {
    const auto& spec = map.spec();
    std::vector<int> owners(spec.padded_z(), 0);
    auto mark = [&](PlaneRange r) {
        for (int z = r.begin; z < r.end; ++z) ++owners[static_cast<std::size_t>(z + spec.radius)];
    };
    for (int i = 0; i < map.divisions(); ++i) mark(map.remainder(i));
    for (int i = 0; i < map.common_count(); ++i) mark(map.common(i));
    for (int n : owners) REQUIRE(n == 1);
}

std::string config_message(const GridSpec& spec, int d, int tb) {
    try {
        build_block_map(spec, d, tb);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("large grid example") {
    const auto map = build_block_map({1152, 1152, 1152, 4}, 8, 12);
    CHECK(map.plane_depth() == 144);
    CHECK(map.halo_depth() == 48);
    CHECK(map.common_count() == 7);
    for (int i = 1; i < 7; ++i) CHECK(map.remainder(i).size() == 48);
    for (int i = 0; i < 7; ++i) CHECK(map.common(i).size() == 96);
    CHECK(map.remainder(0) == PlaneRange{-4, 96});
    CHECK(map.remainder(7) == PlaneRange{1056, 1156});
    CHECK(map.common(0) == PlaneRange{96, 192});
    check_partition(map);
}

TEST_CASE("desk example and its t_b limit") {
    const GridSpec spec{144, 144, 144, 4};
    const auto map = build_block_map(spec, 4, 3);
    CHECK(map.plane_depth() == 36);
    CHECK(map.halo_depth() == 12);
    CHECK(map.remainder(1) == PlaneRange{48, 60});
    CHECK(map.common(1) == PlaneRange{60, 84});
    check_partition(map);

    CHECK_NOTHROW(build_block_map(spec, 4, 4));
    CHECK(config_message(spec, 4, 5) == "nz/D (36) < 2·radius·t_b (40)");
    CHECK(config_message(spec, 5, 1).find("divide nz") != std::string::npos);
    CHECK(!config_message(spec, 0, 1).empty());
    CHECK(!config_message(spec, 4, 0).empty());
}

TEST_CASE("partition holds across shapes") {
    for (int nz : {24, 48, 96, 120}) {
        for (int d = 1; d <= 6; ++d) {
            if (nz % d) continue;
            for (int tb = 1; tb <= 4; ++tb) {
                const GridSpec spec{4, 4, nz, 4};
                if (nz / d < 8 * tb) {
                    CHECK_THROWS_AS(build_block_map(spec, d, tb), Error);
                    continue;
                }
                const auto map = build_block_map(spec, d, tb);
                CAPTURE(nz);
                CAPTURE(d);
                CAPTURE(tb);
                check_partition(map);
                const int h = map.halo_depth();
                for (int i = 0; i < d; ++i) {
                    const PlaneRange b = map.block(i);
                    const PlaneRange w = map.working_set(i);
                    CHECK(w.begin == std::max(b.begin - h, -4));
                    CHECK(w.end == std::min(b.end + h, nz + 4));
                    CHECK(w.size() <= map.max_working_planes());
                    CHECK(map.remainder(i).size() <= map.max_remainder_planes());
                    CHECK(w.contains(map.remainder(i)));
                }
            }
        }
    }
}

TEST_CASE("single division keeps the whole padded axis") {
    const auto map = build_block_map({8, 8, 16, 4}, 1, 2);
    CHECK(map.common_count() == 0);
    CHECK(map.remainder(0) == PlaneRange{-4, 20});
    CHECK(map.working_set(0) == PlaneRange{-4, 20});
    CHECK(map.describe().find("block 0") != std::string::npos);
}

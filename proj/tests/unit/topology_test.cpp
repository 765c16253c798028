/*
   Copyright 2026 The Blockbox Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include <blockbox/common/errors.hpp>
#include <blockbox/topology/topology.hpp>

namespace blockbox::topology {
namespace {

    // Independent oracles: union-find for connectivity, Floyd-Warshall for distances.
    struct UnionFind {
        explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
        std::size_t find(std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
        void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
        std::vector<std::size_t> parent;
    };

    bool connected_oracle(NodeIndex n, const std::vector<Edge>& edges) {
        UnionFind uf{n};
        for (const auto& e : edges) uf.unite(e.a, e.b);
        for (NodeIndex i = 1; i < n; ++i) {
            if (uf.find(i) != uf.find(0)) return false;
        }
        return true;
    }

    Rational asp_oracle(NodeIndex n, const std::vector<Edge>& edges) {
        constexpr long kInf = 1L << 30;
        std::vector<std::vector<long>> d(n, std::vector<long>(n, kInf));
        for (NodeIndex i = 0; i < n; ++i) d[i][i] = 0;
        for (const auto& e : edges) d[e.a][e.b] = d[e.b][e.a] = 1;
        for (NodeIndex k = 0; k < n; ++k)
            for (NodeIndex i = 0; i < n; ++i)
                for (NodeIndex j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        long total = 0;
        for (NodeIndex i = 0; i < n; ++i)
            for (NodeIndex j = i + 1; j < n; ++j) total += d[i][j];
        return Rational{total, static_cast<long>(n) * (n - 1) / 2};
    }

    std::vector<std::size_t> degree_list(const TopologySpec& spec) {
        std::vector<std::size_t> out;
        for (const auto& nbrs : spec.adjacency()) out.push_back(nbrs.size());
        std::sort(out.begin(), out.end());
        return out;
    }

    bool has(const std::vector<Violation>& vs, ViolationKind kind) {
        return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.kind == kind; });
    }

    TEST(Generate, RingOfNine) {
        const auto ring = generate(Kind::ring, 9);
        EXPECT_EQ(ring.edges.size(), 9u);
        EXPECT_EQ(degree_list(ring), std::vector<std::size_t>(9, 2));
        EXPECT_TRUE(ring.adjacent(8, 0));
        EXPECT_TRUE(ring.adjacent(3, 4));
        EXPECT_FALSE(ring.adjacent(0, 2));
    }

    TEST(Generate, StarOfTwoIsOneEdge) {
        const auto star = generate(Kind::star, 2);
        ASSERT_EQ(star.edges.size(), 1u);
        EXPECT_EQ(degree_list(star), (std::vector<std::size_t>{1, 1}));
        EXPECT_TRUE(validate(star).empty());
    }

    TEST(Generate, StarHubDefaultsToZeroAndCanMove) {
        const auto star = generate(Kind::star, 9);
        EXPECT_EQ(star.adjacency()[0].size(), 8u);
        const auto moved = generate(Kind::star, 9, {.hub = 4});
        EXPECT_EQ(moved.adjacency()[4].size(), 8u);
        EXPECT_EQ(moved.adjacency()[0], std::vector<NodeIndex>{4});
        EXPECT_TRUE(validate(moved).empty());
    }

    TEST(Generate, ThreeByThreeGrid) {
        const auto grid = generate(Kind::grid, 9, {.rows = 3, .cols = 3});
        EXPECT_EQ(grid.edges.size(), 12u);
        // 4 corners of degree 2, 4 edge midpoints of degree 3, 1 center of degree 4.
        EXPECT_EQ(degree_list(grid), (std::vector<std::size_t>{2, 2, 2, 2, 3, 3, 3, 3, 4}));
        // Row-major: node 4 is the center, adjacent to 1, 3, 5, 7.
        EXPECT_EQ(grid.adjacency()[4], (std::vector<NodeIndex>{1, 3, 5, 7}));
        EXPECT_FALSE(grid.adjacent(2, 3));  // planar: no wrap across rows
        EXPECT_FALSE(grid.adjacent(0, 6));  // nor across columns
    }

    TEST(Generate, GridWithoutDimensionsPicksSquarestShape) {
        const auto grid = generate(Kind::grid, 12);
        EXPECT_EQ(grid.rows, 3u);
        EXPECT_EQ(grid.cols, 4u);
        const auto line = generate(Kind::grid, 7);
        EXPECT_EQ(line.rows, 1u);
        EXPECT_TRUE(validate(line).empty());
    }

    TEST(Generate, IncompatibleSizesAreInvalidParameters) {
        auto expect_invalid = [](auto fn) {
            try {
                fn();
                ADD_FAILURE() << "expected invalid-parameter";
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
            }
        };
        expect_invalid([] { (void)generate(Kind::ring, 2); });
        expect_invalid([] { (void)generate(Kind::star, 1); });
        expect_invalid([] { (void)generate(Kind::grid, 9, {.rows = 2, .cols = 4}); });
        expect_invalid([] { (void)generate(Kind::grid, 9, {.rows = 2}); });
        expect_invalid([] { (void)generate(Kind::star, 4, {.hub = 4}); });
        expect_invalid([] { (void)generate(Kind::custom, 0); });
    }

    TEST(Validate, GeneratedSpecsHaveNoViolations) {
        for (NodeIndex n = 1; n <= 40; ++n) {
            if (n >= 3) EXPECT_TRUE(validate(generate(Kind::ring, n)).empty()) << n;
            if (n >= 2) EXPECT_TRUE(validate(generate(Kind::star, n)).empty()) << n;
            EXPECT_TRUE(validate(generate(Kind::grid, n)).empty()) << n;
        }
    }

    TEST(Validate, SelfLoopIsReported) {
        const auto spec = generate(Kind::custom, 3, {.edges = {{0, 1}, {1, 2}, {2, 2}}});
        const auto v = validate(spec);
        ASSERT_EQ(v.size(), 1u);
        EXPECT_EQ(v[0].kind, ViolationKind::self_loop);
    }

    TEST(Validate, DuplicatesAndOutOfRangeAreReported) {
        const auto spec = generate(Kind::custom, 3, {.edges = {{0, 1}, {1, 0}, {1, 2}, {2, 5}}});
        const auto v = validate(spec);
        EXPECT_TRUE(has(v, ViolationKind::duplicate_edge));
        EXPECT_TRUE(has(v, ViolationKind::out_of_range));
        EXPECT_FALSE(has(v, ViolationKind::disconnected));
    }

    TEST(Validate, SplitNineNodeGraphIsDisconnected) {
        const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 8}};
        ASSERT_FALSE(connected_oracle(9, edges));
        const auto v = validate(generate(Kind::custom, 9, {.edges = edges}));
        ASSERT_EQ(v.size(), 1u);
        EXPECT_EQ(v[0].kind, ViolationKind::disconnected);
    }

    TEST(Validate, ShapeMismatchOnNamedKinds) {
        auto ring = generate(Kind::ring, 5);
        ring.edges.push_back({0, 2});
        EXPECT_TRUE(has(validate(ring), ViolationKind::shape));
        auto grid = generate(Kind::grid, 9, {.rows = 3, .cols = 3});
        grid.edges.push_back({2, 3});
        EXPECT_TRUE(has(validate(grid), ViolationKind::shape));
        auto star = generate(Kind::star, 4);
        star.edges.push_back({1, 2});
        EXPECT_TRUE(has(validate(star), ViolationKind::shape));
    }

    TEST(Validate, ConnectivityAgreesWithUnionFindOnRandomGraphs) {
        std::mt19937_64 rng{99};
        for (int trial = 0; trial < 500; ++trial) {
            const NodeIndex n = std::uniform_int_distribution<NodeIndex>{2, 12}(rng);
            const auto m = std::uniform_int_distribution<std::size_t>{0, n + 3}(rng);
            std::set<std::pair<NodeIndex, NodeIndex>> unique;
            std::uniform_int_distribution<NodeIndex> pick{0, n - 1};
            while (unique.size() < m && unique.size() < std::size_t{n} * (n - 1) / 2) {
                auto a = pick(rng), b = pick(rng);
                if (a != b) unique.insert(std::minmax(a, b));
            }
            std::vector<Edge> edges;
            for (auto [a, b] : unique) edges.push_back({a, b});
            const auto spec = generate(Kind::custom, n, {.edges = edges});
            const bool connected = connected_oracle(n, edges);
            EXPECT_EQ(validate(spec).empty(), connected) << "trial " << trial;
            if (connected) {
                EXPECT_EQ(average_shortest_path(spec), asp_oracle(n, edges)) << "trial " << trial;
            } else {
                EXPECT_THROW((void)average_shortest_path(spec), Error);
            }
        }
    }

    TEST(AverageShortestPath, StarOfNineIsSixteenNinths) {
        // 36 pairs: 8 hub-leaf at distance 1, C(8,2) = 28 leaf-leaf at distance 2 -> 64/36.
        const auto star = generate(Kind::star, 9);
        EXPECT_EQ(average_shortest_path(star), Rational(16, 9));
        EXPECT_EQ(average_shortest_path(star), asp_oracle(9, star.edges));
    }

    TEST(AverageShortestPath, TriangleIsOne) {
        EXPECT_EQ(average_shortest_path(generate(Kind::ring, 3)), Rational(1));
    }

    TEST(AverageShortestPath, RingOfNineMatchesBruteForce) {
        const auto ring = generate(Kind::ring, 9);
        EXPECT_EQ(average_shortest_path(ring), asp_oracle(9, ring.edges));
        EXPECT_EQ(average_shortest_path(ring), Rational(5, 2));
    }

    TEST(AverageShortestPath, StarBelowGridBelowRingAtNine) {
        const auto star = average_shortest_path(generate(Kind::star, 9));
        const auto grid = average_shortest_path(generate(Kind::grid, 9, {.rows = 3, .cols = 3}));
        const auto ring = average_shortest_path(generate(Kind::ring, 9));
        EXPECT_EQ(grid, asp_oracle(9, generate(Kind::grid, 9).edges));
        EXPECT_LT(star, grid);
        EXPECT_LT(grid, ring);
    }

    TEST(AverageShortestPath, DisconnectedIsInvalidParameter) {
        const auto spec = generate(Kind::custom, 4, {.edges = {{0, 1}, {2, 3}}});
        try {
            (void)average_shortest_path(spec);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::invalid_parameter);
        }
    }

    TEST(Json, RoundTripsEveryKind) {
        for (const auto& spec : {generate(Kind::ring, 9), generate(Kind::star, 5, {.hub = 2}),
                                 generate(Kind::grid, 6, {.rows = 2, .cols = 3}),
                                 generate(Kind::custom, 3, {.edges = {{0, 1}, {1, 2}}})}) {
            const nlohmann::json j = spec;
            EXPECT_EQ(j.get<TopologySpec>(), spec) << j.dump();
        }
    }

    TEST(Json, NamedKindWithoutEdgesIsRegenerated) {
        const auto j = nlohmann::json::parse(R"({"kind":"grid","n":9})");
        EXPECT_EQ(j.get<TopologySpec>(), generate(Kind::grid, 9, {.rows = 3, .cols = 3}));
        EXPECT_THROW((void)nlohmann::json::parse(R"({"kind":"blob","n":9})").get<TopologySpec>(), Error);
        EXPECT_THROW((void)nlohmann::json::parse(R"({"kind":"ring"})").get<TopologySpec>(), Error);
    }

}  // namespace
}  // namespace blockbox::topology

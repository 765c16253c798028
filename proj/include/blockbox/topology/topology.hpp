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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

namespace blockbox::topology {

using NodeIndex = std::uint32_t;
using Rational = boost::rational<std::int64_t>;

enum class Kind : std::uint8_t { ring, star, grid, custom };

[[nodiscard]] std::string_view to_string(Kind kind) noexcept;
//! Throws invalid_parameter for unknown names.
[[nodiscard]] Kind kind_from_string(std::string_view name);

struct Edge {
    NodeIndex a{0};
    NodeIndex b{0};

    friend bool operator==(const Edge&, const Edge&) = default;
};

/**
 * An undirected peer graph over nodes 0..n-1. Edges are kept as given so that validate() can
 * report loops and duplicates in custom graphs; generated specs never contain either.
 */
struct TopologySpec {
    Kind kind{Kind::custom};
    NodeIndex n{0};
    std::vector<Edge> edges;
    std::optional<NodeIndex> hub;   // star only
    std::optional<NodeIndex> rows;  // grid only
    std::optional<NodeIndex> cols;  // grid only

    //! Sorted, de-duplicated neighbor lists; out-of-range endpoints and loops are skipped.
    [[nodiscard]] std::vector<std::vector<NodeIndex>> adjacency() const;
    [[nodiscard]] bool adjacent(NodeIndex a, NodeIndex b) const;

    friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

struct GenerateOptions {
    std::optional<NodeIndex> hub;
    std::optional<NodeIndex> rows;
    std::optional<NodeIndex> cols;
    std::vector<Edge> edges;  // custom only
};

//! Labeling: ring i—(i+1 mod n); star hub 0 unless overridden; grid row-major, planar.
//! A grid without dimensions takes the most square factorization of n. Throws invalid_parameter.
[[nodiscard]] TopologySpec generate(Kind kind, NodeIndex n, const GenerateOptions& options = {});

enum class ViolationKind : std::uint8_t {
    empty,
    out_of_range,
    self_loop,
    duplicate_edge,
    disconnected,
    shape,
};

[[nodiscard]] std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    std::string detail;
};

//! Empty iff the graph is connected, loop- and duplicate-free, and matches its kind's shape.
[[nodiscard]] std::vector<Violation> validate(const TopologySpec& spec);

//! Hop distances from one node (BFS); unreachable nodes are -1.
[[nodiscard]] std::vector<int> distances_from(const TopologySpec& spec, NodeIndex source);

//! Mean BFS distance over unordered distinct pairs. A single node gives 0.
//! Throws invalid_parameter if the graph is disconnected.
[[nodiscard]] Rational average_shortest_path(const TopologySpec& spec);

void to_json(nlohmann::json& j, const TopologySpec& spec);
//! Accepts either full edges or just {kind, n, ...options} and regenerates. Throws invalid_input.
void from_json(const nlohmann::json& j, TopologySpec& spec);

}  // namespace blockbox::topology

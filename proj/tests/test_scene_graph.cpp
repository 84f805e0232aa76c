#include <doctest.h>

#include <algorithm>
#include <map>

#include "helpers.hpp"
#include "pgr/error.hpp"
#include "pgr/rng.hpp"
#include "pgr/scene_graph.hpp"

using namespace pgr;

namespace {
// pin the std::string overload; a bare literal is ambiguous against the
// json overload
SceneGraph from_text(const std::string& text) { return parse_scene_graph(text); }
}  // namespace

TEST_CASE("parses a two-node document") {
    const char* doc = R"({
        "nodes": [
            {"id": "n0", "label": "Building", "attributes": ["Tall", "brick"]},
            {"id": "n1", "label": "house",    "attributes": ["narrow", "White"]}
        ],
        "edges": [
            {"source": "n0", "target": "n1", "relation": "left of"}
        ]
    })";
    SceneGraph g = from_text(doc);
    REQUIRE(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.nodes[0].label == "building");
    CHECK(g.nodes[0].attributes == std::vector<std::string>{"tall", "brick"});
    CHECK(g.nodes[1].label == "house");
    CHECK(g.edges[0].source == "n0");
    CHECK(g.edges[0].target == "n1");
    CHECK(g.edges[0].relation == "left of");
}

TEST_CASE("empty graph is valid") {
    SceneGraph g = from_text(R"({"nodes": [], "edges": []})");
    CHECK(g.nodes.empty());
    CHECK(g.edges.empty());
    CHECK_NOTHROW(validate(g));
    GraphStats st = graph_stats(g);
    CHECK(st.node_count == 0);
    CHECK(st.avg_degree == 0.0);
    CHECK(st.density == 0.0);
    CHECK(st.avg_shortest_path == 0.0);
}

TEST_CASE("dangling edge endpoints are integrity errors") {
    const char* doc = R"({
        "nodes": [{"id": "n0", "label": "tree"}],
        "edges": [{"source": "n0", "target": "n9", "relation": "behind"}]
    })";
    CHECK_THROWS_AS(from_text(doc), IntegrityError);
}

TEST_CASE("duplicate ids, self-loops and duplicate edges are rejected") {
    SceneGraph dup;
    dup.nodes = {{"n0", "tree", {}}, {"n0", "house", {}}};
    CHECK_THROWS_AS(validate(dup), IntegrityError);

    SceneGraph loop;
    loop.nodes = {{"n0", "tree", {}}};
    loop.edges = {{"n0", "n0", "next to"}};
    CHECK_THROWS_AS(validate(loop), IntegrityError);

    SceneGraph twice;
    twice.nodes = {{"n0", "tree", {}}, {"n1", "house", {}}};
    twice.edges = {{"n0", "n1", "behind"}, {"n0", "n1", "behind"}};
    CHECK_THROWS_AS(validate(twice), IntegrityError);

    SceneGraph dup_attr;
    dup_attr.nodes = {{"n0", "tree", {"tall", "Tall"}}};
    CHECK_THROWS_AS(validate(dup_attr), IntegrityError);
}

TEST_CASE("schema violations are schema errors") {
    CHECK_THROWS_AS(from_text("[1,2,3]"), SchemaError);
    CHECK_THROWS_AS(from_text("not json at all"), SchemaError);
    CHECK_THROWS_AS(from_text(R"({"edges": []})"), SchemaError);
    CHECK_THROWS_AS(from_text(R"({"nodes": []})"), SchemaError);
    CHECK_THROWS_AS(from_text(R"({"nodes": [{}], "edges": []})"), SchemaError);
    CHECK_THROWS_AS(from_text(R"({"nodes": [{"id": "n0"}], "edges": []})"), SchemaError);
    CHECK_THROWS_AS(
        from_text(R"({"nodes": [{"id": "n0", "label": "tree", "attributes": "x"}],
                              "edges": []})"),
        SchemaError);
    CHECK_THROWS_AS(
        from_text(R"({"nodes": [], "edges": [], "meta": {"k": 1}})"), SchemaError);
}

TEST_CASE("text normalization") {
    CHECK(normalize_text("  Light-colored,  THING ") == "light-colored thing");
    CHECK(normalize_text("Tall") == "tall");
    CHECK(normalize_text("a  b\t c\n") == "a b c");
    CHECK(normalize_text("...") == "");
    CHECK(tokenize("A tall, BRICK building.") ==
          std::vector<std::string>{"a", "tall", "brick", "building"});
}

TEST_CASE("canonical serialization ignores storage order and id names") {
    pgr::Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        SceneGraph g = testutil::random_graph(rng, 2, 7, 0.3);
        std::string reference = canonical_serialize(g);
        for (int perm = 0; perm < 5; ++perm) {
            SceneGraph shuffled = g;
            // relabel ids bijectively and shuffle both storage vectors
            std::map<std::string, std::string> rename;
            for (std::size_t i = 0; i < g.nodes.size(); ++i)
                rename[g.nodes[i].id] = "z" + std::to_string(90 + perm) + "_" +
                                        std::to_string(i);
            for (auto& n : shuffled.nodes) n.id = rename.at(n.id);
            for (auto& e : shuffled.edges) {
                e.source = rename.at(e.source);
                e.target = rename.at(e.target);
            }
            std::shuffle(shuffled.nodes.begin(), shuffled.nodes.end(), rng.engine());
            std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng.engine());
            CHECK(canonical_serialize(shuffled) == reference);
        }
    }
}

TEST_CASE("canonicalization is a fixpoint") {
    pgr::Rng rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        SceneGraph g = testutil::random_graph(rng, 1, 7, 0.3);
        auto [canon, id_map] = canonicalize(g);
        CHECK(canonical_serialize(canon) == canonical_serialize(g));
        CHECK(id_map.size() == g.nodes.size());
        for (std::size_t i = 0; i < canon.nodes.size(); ++i)
            CHECK(canon.nodes[i].id == "n" + std::to_string(i));
    }
}

TEST_CASE("canonical serialization separates different content") {
    SceneGraph g = testutil::path3();
    std::string base = canonical_serialize(g);

    SceneGraph extra_attr = g;
    extra_attr.nodes[0].attributes.push_back("tall");
    CHECK(canonical_serialize(extra_attr) != base);

    SceneGraph fewer_edges = g;
    fewer_edges.edges.pop_back();
    CHECK(canonical_serialize(fewer_edges) != base);

    SceneGraph renamed_relation = g;
    renamed_relation.edges[0].relation = "behind";
    CHECK(canonical_serialize(renamed_relation) != base);
}

TEST_CASE("path graph statistics") {
    GraphStats st = graph_stats(testutil::path3());
    CHECK(st.node_count == 3);
    CHECK(st.avg_degree == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(st.density == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(st.avg_shortest_path == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("single node statistics") {
    SceneGraph g;
    g.nodes = {{"n0", "tree", {}}};
    GraphStats st = graph_stats(g);
    CHECK(st.node_count == 1);
    CHECK(st.avg_degree == 0.0);
    CHECK(st.density == 0.0);
    CHECK(st.avg_shortest_path == 0.0);
}

TEST_CASE("statistics match a Floyd-Warshall oracle on random graphs") {
    pgr::Rng rng(303);
    for (int trial = 0; trial < 30; ++trial) {
        SceneGraph g = testutil::random_graph(rng, 2, 8, 0.3);
        auto d = testutil::fw_distances(g);
        const std::size_t n = g.nodes.size();

        long long pairs = 0, total = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (d[i][j] > 0) {
                    ++pairs;
                    total += d[i][j];
                }
        double expect_asp = pairs == 0 ? 0.0 : double(total) / double(pairs);

        std::size_t m = undirected_simple_edges(g).size();
        GraphStats st = graph_stats(g);
        CHECK(st.node_count == int(n));
        CHECK(st.avg_degree == doctest::Approx(2.0 * double(m) / double(n)).epsilon(1e-12));
        CHECK(st.density ==
              doctest::Approx(2.0 * double(m) / (double(n) * double(n - 1))).epsilon(1e-12));
        CHECK(st.avg_shortest_path == doctest::Approx(expect_asp).epsilon(1e-12));
        // density relates to average degree through the node count
        CHECK(st.density ==
              doctest::Approx(st.avg_degree / double(n - 1)).epsilon(1e-12));
    }
}

TEST_CASE("antiparallel directed edges project to one undirected edge") {
    SceneGraph g;
    g.nodes = {{"a", "tree", {}}, {"b", "house", {}}};
    g.edges = {{"a", "b", "left of"}, {"b", "a", "right of"}};
    CHECK(undirected_simple_edges(g).size() == 1);
    GraphStats st = graph_stats(g);
    CHECK(st.avg_degree == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.density == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("line-delimited graph container skips blanks") {
    std::string two = R"({"nodes":[{"id":"a","label":"tree"}],"edges":[]})";
    two += "\n\n";
    two += R"({"nodes":[{"id":"b","label":"house"}],"edges":[]})";
    two += "\n";
    auto graphs = parse_scene_graphs(two);
    REQUIRE(graphs.size() == 2);
    CHECK(graphs[0].nodes[0].label == "tree");
    CHECK(graphs[1].nodes[0].label == "house");
}

TEST_CASE("json round trip preserves the graph") {
    pgr::Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        SceneGraph g = testutil::random_graph(rng, 1, 6, 0.3);
        g.meta["source"] = "test";
        SceneGraph back = parse_scene_graph(to_json(g));
        CHECK(back == g);
    }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "pgr/sp_kernel.hpp"
#include "pgr/types.hpp"

using namespace pgr;

namespace {

// Profile recomputed from the Floyd-Warshall oracle in helpers.hpp.
SpProfile oracle_profile(const SceneGraph& g) {
    auto d = testutil::fw_distances(g);
    SpProfile prof;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = i + 1; j < d.size(); ++j)
            if (d[i][j] > 0) ++prof[d[i][j]];
    return prof;
}

double oracle_raw(const SpProfile& a, const SpProfile& b) {
    double dot = 0;
    for (const auto& [len, count] : a) {
        auto it = b.find(len);
        if (it != b.end()) dot += double(count) * double(it->second);
    }
    return dot;
}

}  // namespace

TEST_CASE("three-node path profile counts pairs by distance") {
    SpProfile prof = sp_profile(testutil::path3());
    REQUIRE(prof.size() == 2);
    CHECK(prof.at(1) == 2);
    CHECK(prof.at(2) == 1);
}

TEST_CASE("edgeless graphs have empty profiles") {
    SceneGraph g;
    g.nodes = {{"a", "tree", {}}, {"b", "house", {}}};
    CHECK(sp_profile(g).empty());
    CHECK(sp_profile(SceneGraph{}).empty());
}

TEST_CASE("profiles match an all-pairs oracle on random graphs") {
    pgr::Rng rng(3031);
    for (int trial = 0; trial < 50; ++trial) {
        SceneGraph g = testutil::random_graph(rng, 1, 8, 0.3);
        CHECK(sp_profile(g) == oracle_profile(g));
    }
}

TEST_CASE("raw kernel is the histogram dot product") {
    SpProfile p3 = sp_profile(testutil::path3());
    CHECK(sp_kernel_raw(p3, p3) == 5.0);  // 2*2 + 1*1

    SpProfile empty;
    CHECK(sp_kernel_raw(empty, p3) == 0.0);
    CHECK(sp_kernel_raw(p3, empty) == 0.0);
    CHECK(sp_kernel_raw(empty, empty) == 0.0);

    pgr::Rng rng(3132);
    for (int trial = 0; trial < 30; ++trial) {
        SpProfile a = sp_profile(testutil::random_graph(rng, 1, 8, 0.3));
        SpProfile b = sp_profile(testutil::random_graph(rng, 1, 8, 0.3));
        CHECK(sp_kernel_raw(a, b) == oracle_raw(a, b));
    }
}

TEST_CASE("every graph with at least one edge matches itself perfectly") {
    pgr::Rng rng(3233);
    for (int trial = 0; trial < 25; ++trial) {
        SceneGraph g = testutil::random_graph_with_edge(rng, 2, 8, 0.3);
        CHECK(std::abs(sp_similarity(g, g) - 1.0) <= 1e-12);
    }
}

TEST_CASE("path graphs of different lengths score 2/sqrt(5)") {
    double sim = sp_similarity(testutil::path3(), testutil::path2());
    CHECK(std::abs(sim - 2.0 / std::sqrt(5.0)) <= 1e-12);
}

TEST_CASE("graphs without connected pairs score zero against everything") {
    SceneGraph lonely;
    lonely.nodes = {{"a", "tree", {}}};
    CHECK(sp_similarity(lonely, testutil::path3()) == 0.0);
    CHECK(sp_similarity(lonely, lonely) == 0.0);
    CHECK(sp_similarity(SceneGraph{}, testutil::path3()) == 0.0);
}

TEST_CASE("similarity is symmetric bit for bit") {
    pgr::Rng rng(3334);
    for (int trial = 0; trial < 25; ++trial) {
        SceneGraph a = testutil::random_graph(rng, 1, 8, 0.3);
        SceneGraph b = testutil::random_graph(rng, 1, 8, 0.3);
        CHECK(sp_similarity(a, b) == sp_similarity(b, a));
    }
}

TEST_CASE("similarity ignores node identities") {
    pgr::Rng rng(3435);
    for (int trial = 0; trial < 10; ++trial) {
        SceneGraph a = testutil::random_graph_with_edge(rng, 2, 8, 0.3);
        SceneGraph renamed = a;
        for (auto& n : renamed.nodes) n.id = "other_" + n.id;
        for (auto& e : renamed.edges) {
            e.source = "other_" + e.source;
            e.target = "other_" + e.target;
        }
        std::reverse(renamed.nodes.begin(), renamed.nodes.end());
        SceneGraph probe = testutil::random_graph(rng, 1, 8, 0.3);
        CHECK(sp_similarity(a, probe) == sp_similarity(renamed, probe));
        CHECK(sp_similarity(a, renamed) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("similarity stays inside the unit interval") {
    pgr::Rng rng(3536);
    for (int trial = 0; trial < 40; ++trial) {
        SceneGraph a = testutil::random_graph(rng, 1, 8, 0.4);
        SceneGraph b = testutil::random_graph(rng, 1, 8, 0.4);
        double sim = sp_similarity(a, b);
        CHECK(sim >= 0.0);
        CHECK(sim <= 1.0);
    }
}

TEST_CASE("the normalized kernel produces a positive semidefinite Gram matrix") {
    pgr::Rng rng(3637);
    std::vector<SceneGraph> graphs;
    for (int i = 0; i < 25; ++i) graphs.push_back(testutil::random_graph(rng, 1, 8, 0.3));

    Matrix gram(25, 25);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j) gram(i, j) = sp_similarity(graphs[i], graphs[j]);

    CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
}

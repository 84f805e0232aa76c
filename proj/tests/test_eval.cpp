#include <doctest.h>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "pgr/error.hpp"
#include "pgr/eval.hpp"
#include "pgr/features.hpp"
#include "pgr/geo.hpp"
#include "pgr/util.hpp"

using namespace pgr;

namespace {

constexpr double kEarthRadius = 6371000.0;
constexpr double kPi = 3.14159265358979323846;

// Place a point roughly `meters` east of (lat, lon). Good enough away from
// the poles for the distances these tests use.
GeoPoint east_of(double lat, double lon, double meters) {
    double dlon = meters / (kEarthRadius * std::cos(lat * kPi / 180.0)) * 180.0 / kPi;
    return {lat, lon + dlon};
}

}  // namespace

TEST_CASE("haversine distance matches the spherical arc") {
    CHECK(haversine_m(48.1, 11.5, 48.1, 11.5) == 0.0);

    // one degree of longitude along the equator
    double want = kEarthRadius * kPi / 180.0;
    CHECK(haversine_m(0.0, 0.0, 0.0, 1.0) == doctest::Approx(want).epsilon(1e-9));
    CHECK(haversine_m(0.0, 0.0, 0.0, 1.0) == doctest::Approx(111194.93).epsilon(1e-6));

    pgr::Rng rng(6061);
    for (int trial = 0; trial < 20; ++trial) {
        double lat1 = rng.uniform(-80.0, 80.0), lon1 = rng.uniform(-179.0, 179.0);
        double lat2 = rng.uniform(-80.0, 80.0), lon2 = rng.uniform(-179.0, 179.0);
        CHECK(haversine_m(lat1, lon1, lat2, lon2) == haversine_m(lat2, lon2, lat1, lon1));
        CHECK(haversine_m(lat1, lon1, lat2, lon2) >= 0.0);
    }
}

TEST_CASE("subsampling drops points closer than the spacing") {
    std::vector<LatLon> same(5, {48.1, 11.5});
    CHECK(sample_sequence(same) == std::vector<std::size_t>{0});

    // points exactly 2 m apart all survive the >= rule
    std::vector<LatLon> line;
    for (int i = 0; i < 5; ++i) {
        GeoPoint p = east_of(0.0, 0.0, 2.0001 * i);
        line.push_back({p.lat, p.lon});
    }
    CHECK(sample_sequence(line, 2.0) == std::vector<std::size_t>({0, 1, 2, 3, 4}));

    CHECK(sample_sequence({}).empty());
    CHECK_THROWS_AS(sample_sequence(line, -1.0), RangeError);
}

TEST_CASE("subsampling agrees with a greedy oracle on jittered tracks") {
    pgr::Rng rng(6162);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<LatLon> pts;
        double lon = 11.5;
        for (int i = 0; i < 40; ++i) {
            lon += rng.uniform(0.0, 6e-5);  // 0..~4.4 m steps
            pts.push_back({48.1, lon});
        }
        double spacing = rng.uniform(1.0, 5.0);
        auto got = sample_sequence(pts, spacing);

        std::vector<std::size_t> want;
        std::size_t last = 0;
        want.push_back(0);
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (haversine_m(pts[last].lat, pts[last].lon, pts[i].lat, pts[i].lon) >= spacing) {
                want.push_back(i);
                last = i;
            }
        }
        CHECK(got == want);
    }
}

TEST_CASE("recall counts the first in-radius candidate") {
    std::map<std::string, GeoPoint> positions;
    positions["near"] = east_of(48.1, 11.5, 5.0);
    positions["far"] = east_of(48.1, 11.5, 500.0);

    EvalConfig cfg;
    cfg.ks = {1, 5};
    cfg.radius_m = 10.0;

    RankedQuery q;
    q.query_id = "q0";
    q.coord = {48.1, 11.5};
    q.ranking = {"near", "far"};
    RecallReport rep = recall_at_k({q}, positions, cfg);
    CHECK(rep.recalls == std::vector<double>({100.0, 100.0}));
    REQUIRE(rep.trace.size() == 1);
    CHECK(rep.trace[0].first_hit_rank == 1);
    CHECK(rep.trace[0].top_k == std::vector<std::string>({"near", "far"}));

    // the correct place buried at rank 7 only counts for k >= 7
    std::map<std::string, GeoPoint> pos7;
    RankedQuery q7;
    q7.query_id = "q7";
    q7.coord = {48.1, 11.5};
    for (int i = 0; i < 10; ++i) {
        std::string id = "c" + std::to_string(i);
        pos7[id] = east_of(48.1, 11.5, i == 6 ? 3.0 : 900.0);
        q7.ranking.push_back(id);
    }
    EvalConfig cfg7;
    cfg7.ks = {1, 5, 10, 20};
    cfg7.radius_m = 10.0;
    RecallReport rep7 = recall_at_k({q7}, pos7, cfg7);
    CHECK(rep7.recalls == std::vector<double>({0.0, 0.0, 100.0, 100.0}));
    CHECK(rep7.trace[0].first_hit_rank == 7);
}

TEST_CASE("recall matches a brute-force oracle on random rankings") {
    pgr::Rng rng(6263);
    const int places = 30;
    std::map<std::string, GeoPoint> positions;
    std::vector<std::string> ids;
    for (int i = 0; i < places; ++i) {
        std::string id = "p" + std::to_string(i);
        positions[id] = east_of(48.1, 11.5, rng.uniform(0.0, 200.0));
        ids.push_back(id);
    }

    std::vector<RankedQuery> queries;
    for (int qi = 0; qi < 50; ++qi) {
        RankedQuery q;
        q.query_id = "q" + std::to_string(qi);
        GeoPoint p = east_of(48.1, 11.5, rng.uniform(0.0, 200.0));
        q.coord = p;
        std::vector<std::string> pool = ids;
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.next_below(i)]);
        pool.resize(12);
        q.ranking = pool;
        queries.push_back(std::move(q));
    }

    EvalConfig cfg;
    cfg.ks = {1, 3, 5, 10};
    cfg.radius_m = 25.0;
    RecallReport rep = recall_at_k(queries, positions, cfg);

    for (std::size_t ki = 0; ki < cfg.ks.size(); ++ki) {
        long hits = 0;
        for (const auto& q : queries) {
            bool hit = false;
            for (int r = 0; r < cfg.ks[ki] && r < int(q.ranking.size()); ++r) {
                const GeoPoint& c = positions.at(q.ranking[std::size_t(r)]);
                if (haversine_m(q.coord.lat, q.coord.lon, c.lat, c.lon) <= cfg.radius_m) {
                    hit = true;
                    break;
                }
            }
            if (hit) ++hits;
        }
        double want = 100.0 * double(hits) / double(queries.size());
        CHECK(rep.recalls[ki] == want);
    }

    // recall can only grow with k, and always stays a percentage
    for (std::size_t i = 0; i + 1 < rep.recalls.size(); ++i)
        CHECK(rep.recalls[i] <= rep.recalls[i + 1]);
    for (double r : rep.recalls) {
        CHECK(r >= 0.0);
        CHECK(r <= 100.0);
    }
}

TEST_CASE("recall validates its inputs") {
    std::map<std::string, GeoPoint> positions;
    positions["a"] = {48.1, 11.5};
    RankedQuery q;
    q.query_id = "q";
    q.coord = {48.1, 11.5};
    q.ranking = {"a", "ghost"};

    EvalConfig cfg;
    cfg.ks = {1, 5};
    CHECK_THROWS_AS(recall_at_k({q}, positions, cfg), MissingCoordinates);

    CHECK_THROWS_AS(recall_at_k({}, positions, cfg), EmptyDataset);

    EvalConfig bad_k;
    bad_k.ks = {0};
    q.ranking = {"a"};
    CHECK_THROWS_AS(recall_at_k({q}, positions, bad_k), RangeError);

    EvalConfig bad_radius;
    bad_radius.radius_m = 0.0;
    CHECK_THROWS_AS(recall_at_k({q}, positions, bad_radius), RangeError);

    RankedQuery off_map = q;
    off_map.coord = {123.0, 11.5};
    CHECK_THROWS_AS(recall_at_k({off_map}, positions, cfg), IntegrityError);
}

TEST_CASE("report serialization carries the table and the trace") {
    std::map<std::string, GeoPoint> positions;
    positions["a"] = {48.1, 11.5};
    RankedQuery q;
    q.query_id = "q";
    q.coord = {48.1, 11.5};
    q.ranking = {"a"};
    EvalConfig cfg;
    cfg.ks = {5, 1};  // unsorted and deduped on the way in
    RecallReport rep = recall_at_k({q}, positions, cfg);
    CHECK(rep.ks == std::vector<int>({1, 5}));

    nlohmann::json j = rep.to_json();
    CHECK(j["num_queries"] == 1);
    CHECK(j["recall"].size() == 2);
    CHECK(j["recall"][0]["k"] == 1);
    CHECK(j["recall"][0]["recall_pct"] == 100.0);
    CHECK(j["trace"][0]["query_id"] == "q");
    CHECK(j["trace"][0]["first_hit_rank"] == 1);

    std::string table = rep.to_table();
    CHECK(table.find("recall%") != std::string::npos);
    CHECK(table.find("100.00") != std::string::npos);
}

TEST_CASE("manifests round-trip and reject bad coordinates") {
    testutil::TempDir dir("manifest");
    std::vector<FrameManifestEntry> entries = {
        {"seq0", 0, 48.1, 11.5, "a tall building.", "g0.json"},
        {"seq0", 1, 48.1001, 11.5, "", ""},
        {"seq1", 0, 48.2, 11.6, "a red mailbox.", ""},
    };
    std::string path = dir.file("frames.jsonl");
    save_manifest(entries, path);
    auto back = load_manifest(path);
    REQUIRE(back.size() == entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        CHECK(back[i].seq_id == entries[i].seq_id);
        CHECK(back[i].frame_idx == entries[i].frame_idx);
        CHECK(back[i].lat == entries[i].lat);
        CHECK(back[i].lon == entries[i].lon);
        CHECK(back[i].caption == entries[i].caption);
        CHECK(back[i].graph_path == entries[i].graph_path);
    }

    write_file_atomic(path, "{\"seq_id\":\"s\",\"frame_idx\":0,\"lat\":91.0,\"lon\":0.0}\n");
    CHECK_THROWS_AS(load_manifest(path), IntegrityError);
    write_file_atomic(path, "{\"seq_id\":\"s\"}\n");
    CHECK_THROWS_AS(load_manifest(path), SchemaError);
}

TEST_CASE("index evaluation finds exact-duplicate queries at rank one") {
    pgr::Rng rng(6364);
    HashedEmbedder emb(12);
    GatConfig gc;
    gc.num_layers = 1;
    gc.heads = 2;
    gc.hidden_dim = 8;
    gc.output_dim = 8;
    gc.seed = 21;
    auto params = init_params(gc, emb.dim(), emb.dim());

    RetrievalIndex idx;
    idx.gat = gc;
    idx.dim = gc.output_dim;
    std::vector<EvalQuery> queries;
    for (int i = 0; i < 6; ++i) {
        SceneGraph g = testutil::random_graph_with_edge(rng, 2, 6, 0.4);
        GeoPoint coord = east_of(48.1, 11.5, 200.0 * i);
        idx.records.push_back(build_record("pl" + std::to_string(i), g, params, emb, coord));
        queries.push_back({"q" + std::to_string(i), g, coord});
    }

    EvalConfig cfg;
    cfg.ks = {1, 5};
    RecallReport rep = evaluate_index(idx, queries, params, emb, AlphaPolicy::constant(0.5), cfg);
    CHECK(rep.num_queries == 6);
    CHECK(rep.recalls == std::vector<double>({100.0, 100.0}));

    // records without coordinates cannot be evaluated
    idx.records[0].coord.reset();
    CHECK_THROWS_AS(evaluate_index(idx, queries, params, emb, AlphaPolicy::constant(0.5), cfg),
                    MissingCoordinates);
}

#include "pgr/eval.hpp"

#include <algorithm>
#include <cstdio>

#include "pgr/error.hpp"
#include "pgr/util.hpp"

namespace pgr {

namespace {

void check_lat_lon(double lat, double lon, const std::string& where) {
    if (!(lat >= -90.0 && lat <= 90.0))
        throw IntegrityError(where + ": latitude " + std::to_string(lat) + " out of [-90,90]");
    if (!(lon >= -180.0 && lon <= 180.0))
        throw IntegrityError(where + ": longitude " + std::to_string(lon) + " out of [-180,180]");
}

}  // namespace

std::vector<FrameManifestEntry> load_manifest(const std::string& path) {
    std::vector<FrameManifestEntry> entries;
    auto lines = split_lines(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        nlohmann::json j = nlohmann::json::parse(lines[i], nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("seq_id") ||
            !j.contains("frame_idx") || !j.contains("lat") || !j.contains("lon"))
            throw SchemaError("bad manifest record at line " + std::to_string(i + 1) + " of " +
                              path);
        FrameManifestEntry e;
        e.seq_id = j["seq_id"].get<std::string>();
        e.frame_idx = j["frame_idx"].get<int>();
        e.lat = j["lat"].get<double>();
        e.lon = j["lon"].get<double>();
        e.caption = j.value("caption", "");
        e.graph_path = j.value("graph_path", "");
        check_lat_lon(e.lat, e.lon,
                      "manifest " + e.seq_id + "/" + std::to_string(e.frame_idx));
        entries.push_back(std::move(e));
    }
    return entries;
}

void save_manifest(const std::vector<FrameManifestEntry>& entries, const std::string& path) {
    std::string out;
    for (const auto& e : entries) {
        nlohmann::json j;
        j["seq_id"] = e.seq_id;
        j["frame_idx"] = e.frame_idx;
        j["lat"] = e.lat;
        j["lon"] = e.lon;
        if (!e.caption.empty()) j["caption"] = e.caption;
        if (!e.graph_path.empty()) j["graph_path"] = e.graph_path;
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

nlohmann::json RecallReport::to_json() const {
    nlohmann::json j;
    j["num_queries"] = num_queries;
    j["radius_m"] = radius_m;
    auto& arr = j["recall"] = nlohmann::json::array();
    for (std::size_t i = 0; i < ks.size(); ++i)
        arr.push_back({{"k", ks[i]}, {"recall_pct", recalls[i]}});
    auto& tr = j["trace"] = nlohmann::json::array();
    for (const auto& t : trace) {
        nlohmann::json e;
        e["query_id"] = t.query_id;
        e["top_k"] = t.top_k;
        e["first_hit_rank"] = t.first_hit_rank;
        tr.push_back(std::move(e));
    }
    return j;
}

std::string RecallReport::to_table() const {
    std::string out;
    char buf[64];
    out += "      k   recall%\n";
    for (std::size_t i = 0; i < ks.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%7d   %6.2f\n", ks[i], recalls[i]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "queries: %ld, radius: %.1f m\n", num_queries, radius_m);
    out += buf;
    return out;
}

RecallReport recall_at_k(const std::vector<RankedQuery>& rankings,
                         const std::map<std::string, GeoPoint>& positions,
                         const EvalConfig& cfg) {
    if (rankings.empty()) throw EmptyDataset("no evaluation queries");
    if (cfg.ks.empty()) throw RangeError("no k values requested");
    for (int k : cfg.ks)
        if (k < 1) throw RangeError("k values must be >= 1");
    if (!(cfg.radius_m > 0.0)) throw RangeError("radius must be positive");

    std::vector<int> ks = cfg.ks;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const int max_k = ks.back();

    RecallReport report;
    report.ks = ks;
    report.num_queries = static_cast<long>(rankings.size());
    report.radius_m = cfg.radius_m;

    std::vector<long> hits(ks.size(), 0);
    for (const auto& q : rankings) {
        check_lat_lon(q.coord.lat, q.coord.lon, "query " + q.query_id);
        QueryTrace t;
        t.query_id = q.query_id;
        const int upto = std::min<int>(max_k, static_cast<int>(q.ranking.size()));
        for (int r = 0; r < upto; ++r) {
            const std::string& pid = q.ranking[static_cast<std::size_t>(r)];
            auto it = positions.find(pid);
            if (it == positions.end())
                throw MissingCoordinates("no coordinates for ranked place '" + pid + "'");
            t.top_k.push_back(pid);
            if (t.first_hit_rank == 0 &&
                haversine_m(q.coord.lat, q.coord.lon, it->second.lat, it->second.lon) <=
                    cfg.radius_m)
                t.first_hit_rank = r + 1;
        }
        if (t.first_hit_rank > 0)
            for (std::size_t i = 0; i < ks.size(); ++i)
                if (t.first_hit_rank <= ks[i]) ++hits[i];
        report.trace.push_back(std::move(t));
    }
    for (std::size_t i = 0; i < ks.size(); ++i)
        report.recalls.push_back(100.0 * static_cast<double>(hits[i]) /
                                 static_cast<double>(rankings.size()));
    return report;
}

RecallReport evaluate_index(const RetrievalIndex& idx, const std::vector<EvalQuery>& queries,
                            const GatParameters<double>& params,
                            const EmbeddingProvider& provider, const AlphaPolicy& policy,
                            const EvalConfig& cfg) {
    std::map<std::string, GeoPoint> positions;
    for (const auto& rec : idx.records) {
        if (!rec.coord)
            throw MissingCoordinates("index record '" + rec.place_id + "' has no coordinates");
        positions[rec.place_id] = *rec.coord;
    }
    int max_k = 1;
    for (int k : cfg.ks) max_k = std::max(max_k, k);
    std::vector<RankedQuery> rankings;
    rankings.reserve(queries.size());
    for (const auto& q : queries) {
        QueryResult res = query_index(idx, q.graph, params, provider, policy, max_k);
        RankedQuery rq;
        rq.query_id = q.query_id;
        rq.coord = q.coord;
        for (const auto& c : res.ranked) rq.ranking.push_back(c.place_id);
        rankings.push_back(std::move(rq));
    }
    return recall_at_k(rankings, positions, cfg);
}

}  // namespace pgr

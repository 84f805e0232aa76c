#include "pgr/service.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include <httplib.h>
#include <json.hpp>

#include "pgr/error.hpp"
#include "pgr/rng.hpp"
#include "pgr/util.hpp"

namespace pgr {

namespace {

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string utc_now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string canonical_request(const ServiceRequest& req) {
    nlohmann::json doc;
    doc["prompt"] = req.prompt;
    doc["model"] = req.model;
    if (req.image_ref) doc["image"] = *req.image_ref;
    return doc.dump();
}

std::string request_hash(const ServiceRequest& req) {
    return hex64(fnv1a64(canonical_request(req)));
}

namespace {

class HttpTransport : public Transport {
public:
    std::string post(const std::string& endpoint, const std::string& api_key,
                     const std::string& body) override {
        // split "http://host:port/path" into client target + path
        auto scheme_end = endpoint.find("://");
        if (scheme_end == std::string::npos)
            throw NetworkError("endpoint must include scheme: " + endpoint);
        auto path_start = endpoint.find('/', scheme_end + 3);
        std::string base = path_start == std::string::npos ? endpoint
                                                           : endpoint.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/"
                                                           : endpoint.substr(path_start);
        httplib::Client client(base);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) throw NetworkError("request to " + endpoint + " failed: " +
                                     httplib::to_string(res.error()));
        if (res->status == 401 || res->status == 403)
            throw AuthError("service rejected credentials (HTTP " +
                            std::to_string(res->status) + ")");
        if (res->status < 200 || res->status >= 300)
            throw NetworkError("service returned HTTP " + std::to_string(res->status));
        return res->body;
    }
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttpTransport>(); }

ServiceConfig ServiceConfig::from_env() {
    ServiceConfig cfg;
    if (const char* e = std::getenv("T2G_SERVICE_ENDPOINT")) cfg.endpoint = e;
    if (const char* k = std::getenv("T2G_SERVICE_KEY")) cfg.api_key = k;
    if (const char* d = std::getenv("T2G_CACHE_DIR")) cfg.cache_dir = d;
    return cfg;
}

ServiceClient::ServiceClient(ServiceConfig cfg, std::unique_ptr<Transport> transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {}

std::filesystem::path ServiceClient::cache_path(const ServiceRequest& req) const {
    return cfg_.cache_dir / (request_hash(req) + ".json");
}

ServiceResponse ServiceClient::live_call(const ServiceRequest& req) {
    if (cfg_.endpoint.empty()) throw NetworkError("no service endpoint configured");
    if (cfg_.api_key.empty()) throw AuthError("no service credential configured");
    ServiceResponse resp;
    resp.text = transport_->post(cfg_.endpoint, cfg_.api_key, canonical_request(req));
    resp.content_hash = request_hash(req);
    resp.timestamp = utc_now_iso8601();
    return resp;
}

ServiceResponse ServiceClient::read_cache(const ServiceRequest& req) const {
    auto path = cache_path(req);
    if (!std::filesystem::exists(path))
        throw CacheMiss("no cached response for request " + request_hash(req));
    nlohmann::json doc = nlohmann::json::parse(read_file(path));
    ServiceResponse resp;
    resp.text = doc.at("response").at("text").get<std::string>();
    resp.content_hash = doc.at("response").at("content_hash").get<std::string>();
    resp.timestamp = doc.at("response").at("timestamp").get<std::string>();
    return resp;
}

void ServiceClient::write_cache(const ServiceRequest& req, const ServiceResponse& resp) const {
    if (cfg_.cache_dir.empty()) throw CacheMiss("no cache directory configured");
    std::filesystem::create_directories(cfg_.cache_dir);
    nlohmann::json doc;
    doc["request"] = nlohmann::json::parse(canonical_request(req));
    doc["response"] = {{"text", resp.text},
                       {"content_hash", resp.content_hash},
                       {"timestamp", resp.timestamp}};
    write_file_atomic(cache_path(req), doc.dump(2) + "\n");
}

ServiceResponse ServiceClient::call(const ServiceRequest& req, CallMode mode) {
    switch (mode) {
        case CallMode::replay:
            return read_cache(req);
        case CallMode::live:
            return live_call(req);
        case CallMode::record: {
            auto resp = live_call(req);
            write_cache(req, resp);
            return resp;
        }
    }
    throw Error(ErrorKind::usage, "unknown call mode");
}

std::vector<ServiceResponse> ServiceClient::call_many(const std::vector<ServiceRequest>& reqs,
                                                      CallMode mode) {
    std::vector<ServiceResponse> out(reqs.size());
    std::vector<std::exception_ptr> errors(reqs.size());
    parallel_for(reqs.size(), cfg_.parallelism, [&](std::size_t i) {
        try {
            out[i] = call(reqs[i], mode);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace pgr

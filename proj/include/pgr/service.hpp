#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pgr {

struct ServiceRequest {
    std::string prompt;
    std::string model;
    std::optional<std::string> image_ref;  // path or URL; hashed into the cache key
};

struct ServiceResponse {
    std::string text;
    std::string content_hash;  // hash of the canonical request, not the response
    std::string timestamp;     // UTC, ISO 8601; replay returns the recorded one
};

enum class CallMode { live, replay, record };

// canonical JSON of the request; the cache key is fnv1a64 of these bytes
std::string canonical_request(const ServiceRequest& req);
std::string request_hash(const ServiceRequest& req);

// Network seam. The production transport posts JSON and returns the body;
// tests substitute counting or failing transports.
class Transport {
public:
    virtual ~Transport() = default;
    // throws NetworkError / AuthError
    virtual std::string post(const std::string& endpoint, const std::string& api_key,
                             const std::string& body) = 0;
};

std::unique_ptr<Transport> make_http_transport();

struct ServiceConfig {
    std::string endpoint;   // T2G_SERVICE_ENDPOINT
    std::string api_key;    // T2G_SERVICE_KEY
    std::filesystem::path cache_dir;  // T2G_CACHE_DIR
    int parallelism = 4;

    static ServiceConfig from_env();
};

// Vision-language / LLM service client with a content-addressed replay cache.
// replay never touches the transport; record is live plus an atomic cache
// write; cache files are one JSON document per request hash.
class ServiceClient {
public:
    ServiceClient(ServiceConfig cfg, std::unique_ptr<Transport> transport);

    ServiceResponse call(const ServiceRequest& req, CallMode mode);

    // Concurrent calls with the configured parallelism limit. Result order
    // matches request order regardless of scheduling.
    std::vector<ServiceResponse> call_many(const std::vector<ServiceRequest>& reqs,
                                           CallMode mode);

    std::filesystem::path cache_path(const ServiceRequest& req) const;

private:
    ServiceResponse live_call(const ServiceRequest& req);
    ServiceResponse read_cache(const ServiceRequest& req) const;
    void write_cache(const ServiceRequest& req, const ServiceResponse& resp) const;

    ServiceConfig cfg_;
    std::unique_ptr<Transport> transport_;
};

}  // namespace pgr

#include "drk/providers.hpp"

#include "drk/errors.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>

namespace drk::providers {

namespace {

struct ParsedUrl {
    std::string base; // scheme://host[:port]
    std::string path; // /... (defaults to /)
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error(Errc::bad_config, "endpoint url must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos)
        return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibClient final : public HttpClient {
public:
    HttpResponse post_json(const std::string& url, const std::string& body,
                           const std::vector<std::pair<std::string, std::string>>& headers,
                           double timeout_s) override {
        const ParsedUrl parsed = parse_url(url);
        httplib::Client client(parsed.base);
        const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::duration<double>(timeout_s));
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        httplib::Headers hl;
        for (const auto& [k, v] : headers)
            hl.emplace(k, v);

        auto result = client.Post(parsed.path, hl, body, "application/json");
        if (!result) {
            const auto err = result.error();
            if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                err == httplib::Error::Write)
                throw Error(Errc::timeout, url + ": " + httplib::to_string(err));
            throw Error(Errc::http_error, url + ": " + httplib::to_string(err));
        }
        return {result->status, result->body};
    }
};

} // namespace

HttpClientFactory default_http_factory() {
    return [] { return std::make_shared<HttplibClient>(); };
}

} // namespace drk::providers

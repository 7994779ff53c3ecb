#pragma once

// Loopback mock server for provider wire-format tests.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

struct MockServer {
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    explicit MockServer(Handler handler) {
        server.Post("/v1/mock", [this, handler](const httplib::Request& req, httplib::Response& res) {
            {
                std::lock_guard<std::mutex> lock(mutex);
                bodies.push_back(req.body);
                auto it = req.headers.find("Authorization");
                auth_headers.push_back(it == req.headers.end() ? "" : it->second);
            }
            handler(req, res);
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockServer() {
        server.stop();
        thread.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/mock"; }

    std::size_t request_count() {
        std::lock_guard<std::mutex> lock(mutex);
        return bodies.size();
    }
    std::vector<std::string> request_bodies() {
        std::lock_guard<std::mutex> lock(mutex);
        return bodies;
    }
    std::vector<std::string> authorizations() {
        std::lock_guard<std::mutex> lock(mutex);
        return auth_headers;
    }

    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::mutex mutex;
    std::vector<std::string> bodies;
    std::vector<std::string> auth_headers;
};

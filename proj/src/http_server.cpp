#include "freshrec/http_server.hpp"

#include <thread>

#include <httplib.h>

#include "freshrec/event_log.hpp"
#include "freshrec/strings.hpp"

namespace freshrec {

struct HttpService::Impl {
  Engine& engine;
  RealtimeStore& store;
  httplib::Server server;
  std::thread worker;

  Impl(Engine& e, RealtimeStore& s) : engine(e), store(s) { routes(); }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok\n", "text/plain");
    });

    server.Get("/recommend", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      try {
        if (!req.has_param("user") || !req.has_param("now") ||
            !req.has_param("count")) {
          res.status = 400;
          res.set_content("missing query parameter: need user, now, count\n",
                          "text/plain");
          return;
        }
        RecRequest rec;
        rec.user_id = req.get_param_value("user");
        rec.now = parse_i64(req.get_param_value("now"), "now");
        const std::int64_t count =
            parse_i64(req.get_param_value("count"), "count");
        if (count < 1) fail("count must be >= 1");
        rec.requested_count = static_cast<std::size_t>(count);
        const Engine::Detail detail = engine.recommend_detailed(rec);
        res.set_content(format_response(detail.list, detail.arm), "text/plain");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(std::string(e.what()) + "\n", "text/plain");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(std::string("internal error: ") + e.what() + "\n",
                        "text/plain");
      }
    });

    server.Post("/event", [this](const httplib::Request& req,
                                 httplib::Response& res) {
      try {
        std::string_view body = req.body;
        while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) {
          body.remove_suffix(1);
        }
        store.ingest(parse_event(body));
        res.set_content("ok\n", "text/plain");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(std::string(e.what()) + "\n", "text/plain");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(std::string("internal error: ") + e.what() + "\n",
                        "text/plain");
      }
    });

    server.set_exception_handler([](const httplib::Request&,
                                    httplib::Response& res, std::exception_ptr) {
      res.status = 500;
      res.set_content("internal error\n", "text/plain");
    });
  }
};

HttpService::HttpService(Engine& engine, RealtimeStore& store)
    : impl_(std::make_unique<Impl>(engine, store)) {}

HttpService::~HttpService() { stop(); }

void HttpService::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail("failed to listen on " + host + ":" + std::to_string(port));
  }
}

int HttpService::start_async(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  if (port <= 0) fail("failed to bind a port on " + host);
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void HttpService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace freshrec

#pragma once

#include <memory>
#include <string>

#include "freshrec/serving.hpp"

namespace freshrec {

// Minimal HTTP front end over one Engine:
//   GET  /health                          -> "ok"
//   GET  /recommend?user=<id>&now=<ts>&count=<k>
//                                         -> format_response() text
//   POST /event   (body: one event-log line) -> ingest into the store
// Malformed input yields 400 with a message; unexpected failures yield 500
// and stay isolated to their request.
class HttpService {
 public:
  HttpService(Engine& engine, RealtimeStore& store);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Blocking; serves until stop() is called from another thread.
  void run(const std::string& host, int port);

  // Binds an ephemeral port and serves on a background thread; returns the
  // bound port. Test support.
  int start_async(const std::string& host);

  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace freshrec

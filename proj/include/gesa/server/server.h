#ifndef GESA_SERVER_SERVER_H_
#define GESA_SERVER_SERVER_H_

#include <memory>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "gesa/server/service.h"

namespace httplib {
class Server;
}

namespace gesa::server {

struct ServerOptions {
  std::string data_dir = "gesa-data";
  std::string host = "0.0.0.0";
  int port = 8080;
};

// GESA_DATA_DIR and GESA_PORT over the defaults.
absl::StatusOr<ServerOptions> OptionsFromEnvironment();

// HTTP routes over a Service. Request and response bodies are JSON; errors
// are {"error": message} with 400 (invalid input), 404 (unknown entity), 409
// (state conflict, e.g. a job still running or a full role) or 500. The
// request token of a mutating call travels in the Idempotency-Key header.
class HttpServer {
 public:
  explicit HttpServer(Service* service);
  ~HttpServer();

  // Returns the bound port.
  absl::StatusOr<int> Bind(const std::string& host, int port);
  // Blocks until Stop().
  absl::Status Listen();
  void Stop();

 private:
  Service* service_;
  std::unique_ptr<httplib::Server> http_;
};

// Opens the service under options.data_dir and serves until killed.
absl::Status Serve(const ServerOptions& options);

}  // namespace gesa::server

#endif  // GESA_SERVER_SERVER_H_

#include "gesa/server/server.h"

#include <cstdlib>
#include <functional>
#include <utility>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "gesa/core/status_macros.h"
#include "httplib.h"
#include "nlohmann/json.hpp"

namespace gesa::server {
namespace {

using json = nlohmann::json;

int HttpCode(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk: return 200;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange: return 400;
    case absl::StatusCode::kNotFound: return 404;
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kAlreadyExists:
    case absl::StatusCode::kAborted: return 409;
    default: return 500;
  }
}

void Reply(httplib::Response& res, const absl::StatusOr<json>& result,
           int ok_code = 200) {
  if (result.ok()) {
    res.status = ok_code;
    res.set_content(result->dump(2) + "\n", "application/json");
  } else {
    res.status = HttpCode(result.status());
    res.set_content(json{{"error", std::string(result.status().message())}}.dump() + "\n",
                    "application/json");
  }
}

absl::StatusOr<json> Body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json doc = json::parse(req.body, nullptr, false);
  if (doc.is_discarded()) return absl::InvalidArgumentError("body is not valid JSON");
  return doc;
}

std::string Token(const httplib::Request& req) {
  return req.get_header_value("Idempotency-Key");
}

using Handler = std::function<absl::StatusOr<json>(const json&, const std::string&)>;

// Parses the body and forwards it with the request token.
void Mutating(httplib::Response& res, const httplib::Request& req,
              const Handler& handler, int ok_code = 200) {
  absl::StatusOr<json> body = Body(req);
  if (!body.ok()) return Reply(res, body.status());
  Reply(res, handler(*body, Token(req)), ok_code);
}

}  // namespace

absl::StatusOr<ServerOptions> OptionsFromEnvironment() {
  ServerOptions options;
  if (const char* dir = std::getenv("GESA_DATA_DIR"); dir != nullptr && *dir != '\0') {
    options.data_dir = dir;
  }
  if (const char* port = std::getenv("GESA_PORT"); port != nullptr && *port != '\0') {
    int p = 0;
    if (!absl::SimpleAtoi(port, &p) || p < 0 || p > 65535) {
      return absl::InvalidArgumentError(absl::StrCat("GESA_PORT is not a port: ", port));
    }
    options.port = p;
  }
  return options;
}

HttpServer::HttpServer(Service* service)
    : service_(service), http_(std::make_unique<httplib::Server>()) {
  httplib::Server& h = *http_;
  Service& s = *service_;

  h.Post("/datasets", [&s](const httplib::Request& req, httplib::Response& res) {
    Mutating(res, req, [&](const json& b, const std::string& t) {
      return s.CreateDataset(b, t);
    }, 201);
  });
  h.Get(R"(/datasets/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    Reply(res, s.GetDataset(req.matches[1]));
  });
  h.Post(R"(/datasets/([^/]+)/generate)",
         [&s](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    Mutating(res, req, [&](const json& b, const std::string& t) {
      return s.GenerateDataset(id, b, t);
    });
  });
  h.Post("/allocations", [&s](const httplib::Request& req, httplib::Response& res) {
    Mutating(res, req, [&](const json& b, const std::string& t) {
      return s.SubmitAllocation(b, t);
    }, 202);
  });
  h.Get(R"(/allocations/([^/]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    Reply(res, s.GetJob(req.matches[1]));
  });
  h.Get(R"(/allocations/([^/]+)/front)",
        [&s](const httplib::Request& req, httplib::Response& res) {
    Reply(res, s.GetFront(req.matches[1]));
  });
  h.Get(R"(/allocations/([^/]+)/plan)",
        [&s](const httplib::Request& req, httplib::Response& res) {
    Reply(res, s.CurrentPlan(req.matches[1]));
  });
  h.Post(R"(/allocations/([^/]+)/select)",
         [&s](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    Mutating(res, req, [&](const json& b, const std::string& t) {
      return s.Select(id, b, t);
    });
  });
  h.Post(R"(/allocations/([^/]+)/overrides)",
         [&s](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    Mutating(res, req, [&](const json& b, const std::string& t) {
      return s.RecordOverride(id, b, t);
    }, 201);
  });
  h.Get(R"(/allocations/([^/]+)/overrides)",
        [&s](const httplib::Request& req, httplib::Response& res) {
    Reply(res, s.ListOverrides(req.matches[1]));
  });
  h.Get(R"(/allocations/([^/]+)/explanations/([^/]+)/([^/]+))",
        [&s](const httplib::Request& req, httplib::Response& res) {
    Reply(res, s.Explanation(req.matches[1], req.matches[2], req.matches[3]));
  });
  h.Get(R"(/allocations/([^/]+)/fairness-report)",
        [&s](const httplib::Request& req, httplib::Response& res) {
    Reply(res, s.FairnessReport(req.matches[1]));
  });
  h.Post("/feedback/weights", [&s](const httplib::Request& req, httplib::Response& res) {
    Mutating(res, req, [&](const json& b, const std::string& t) {
      return s.UpdateFeedback(b, t);
    });
  });
  h.Get("/feedback/weights", [&s](const httplib::Request&, httplib::Response& res) {
    Reply(res, s.Feedback());
  });
}

HttpServer::~HttpServer() { Stop(); }

absl::StatusOr<int> HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = http_->bind_to_any_port(host);
    if (bound < 0) return absl::UnavailableError(absl::StrCat("cannot bind ", host));
    return bound;
  }
  if (!http_->bind_to_port(host, port)) {
    return absl::UnavailableError(absl::StrCat("cannot bind ", host, ":", port));
  }
  return port;
}

absl::Status HttpServer::Listen() {
  if (!http_->listen_after_bind()) return absl::UnavailableError("listen failed");
  return absl::OkStatus();
}

void HttpServer::Stop() {
  if (http_->is_running()) http_->stop();
}

absl::Status Serve(const ServerOptions& options) {
  ASSIGN_OR_RETURN(std::unique_ptr<Service> service, Service::Open(options.data_dir));
  HttpServer server(service.get());
  RETURN_IF_ERROR(server.Bind(options.host, options.port).status());
  return server.Listen();
}

}  // namespace gesa::server

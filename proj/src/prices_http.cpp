#include <httplib.h>

#include <atomic>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "hlgym/errors.hpp"
#include "hlgym/prices.hpp"

namespace hlgym {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ArgumentError("endpoint must be an http:// URL: " + url);
  if (url.compare(0, scheme_end, "http") != 0) {
    throw ArgumentError("only plain http endpoints are supported: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string price_json(const PriceSeries& series) {
  json arr = json::array();
  for (const auto& p : series.points()) {
    arr.push_back({{"start", format_iso8601(p.start)}, {"price", p.price.eur_per_mwh()}});
  }
  return arr.dump();
}

PriceSeries parse_price_json(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("price response is not JSON: ") + e.what(), 0);
  }
  if (!doc.is_array()) throw ParseError("price response must be a JSON array", 0);
  std::vector<PricePoint> points;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& item = doc[i];
    if (!item.is_object() || !item.contains("start") || !item.contains("price") ||
        !item["start"].is_string() || !item["price"].is_number()) {
      throw ParseError("price item " + std::to_string(i) + " lacks string 'start' or numeric 'price'", 0);
    }
    try {
      points.push_back({parse_iso8601(item["start"].get<std::string>()),
                        EnergyPrice(item["price"].get<double>())});
    } catch (const ArgumentError& e) {
      throw ParseError("price item " + std::to_string(i) + ": " + e.what(), 0);
    }
  }
  return PriceSeries(std::move(points));
}

PriceSeries fetch_day_ahead(const std::string& endpoint, const std::string& area, Timestamp day,
                            const FetchOptions& options) {
  const auto url = split_url(endpoint);
  httplib::Client client(url.origin);
  const auto secs = options.timeout.count() / 1000;
  const auto usecs = (options.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  const std::string date = format_date(day);
  const httplib::Params params{{"area", area}, {"date", date}};

  std::string last_failure;
  auto backoff = options.backoff;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Get(url.path, params, httplib::Headers{});
    if (!res) {
      last_failure = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_failure = "HTTP status " + std::to_string(res->status);
      continue;
    }
    PriceSeries series = parse_price_json(res->body);
    const Timestamp next_day = day + std::chrono::days(1);
    if (series.empty() || series.begin_time() != day) {
      throw ValidationError("day-ahead prices for " + date + " do not start at " + format_iso8601(day));
    }
    if (series.end_time() != next_day) {
      throw ValidationError("missing price hour at " + format_iso8601(series.end_time()));
    }
    return series;
  }
  throw TransportError("fetching day-ahead prices from " + endpoint + " failed after " +
                       std::to_string(options.retries + 1) + " attempts: " + last_failure);
}

struct PriceStubServer::Impl {
  Impl(PriceSeries s, Script sc) : series(std::move(s)), script(sc) {}
  PriceSeries series;
  Script script;
  httplib::Server server;
  std::thread thread;
  std::atomic<int> requests{0};
  std::mutex wait_mutex;
};

PriceStubServer::PriceStubServer(PriceSeries series, std::uint16_t port, Script script)
    : impl_(std::make_unique<Impl>(std::move(series), script)) {
  Impl* impl = impl_.get();
  impl->server.Get("/dayahead", [impl](const httplib::Request& req, httplib::Response& res) {
    const int n = ++impl->requests;
    if (n <= impl->script.fail_first) {
      res.status = 500;
      res.set_content("scripted failure", "text/plain");
      return;
    }
    if (!req.has_param("date") || !req.has_param("area")) {
      res.status = 400;
      res.set_content("need area and date", "text/plain");
      return;
    }
    Timestamp day;
    try {
      day = parse_date(req.get_param_value("date"));
    } catch (const Error&) {
      res.status = 400;
      return;
    }
    auto slice = impl->series.slice(day, day + std::chrono::days(1));
    if (slice.empty()) {
      res.status = 404;
      return;
    }
    if (impl->script.drop_last_hours > 0) {
      slice = slice.slice(day, day + std::chrono::hours(24 - impl->script.drop_last_hours));
    }
    res.set_content(price_json(slice), "application/json");
  });
  if (port == 0) {
    const int bound = impl->server.bind_to_any_port("127.0.0.1");
    if (bound < 0) throw TransportError("price stub could not bind");
    port_ = static_cast<std::uint16_t>(bound);
  } else {
    if (!impl->server.bind_to_port("127.0.0.1", port)) {
      throw TransportError("price stub could not bind port " + std::to_string(port));
    }
    port_ = port;
  }
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

PriceStubServer::~PriceStubServer() { stop(); }

std::string PriceStubServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(port_) + "/dayahead";
}

int PriceStubServer::requests() const { return impl_->requests.load(); }

void PriceStubServer::wait() {
  while (impl_->server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

void PriceStubServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace hlgym

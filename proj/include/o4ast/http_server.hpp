#pragma once

#include <string>

#include "httplib.h"
#include "json.hpp"

#include "error.hpp"
#include "service.hpp"

namespace o4ast {

namespace http_detail {

using nlohmann::json;

inline QueryRequest parse_request(const std::string& body,
                                  const HierarchyConfig& cfg) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    raise(ErrorKind::Schema, std::string("bad JSON body: ") + e.what());
  }
  QueryRequest req;
  if (!j.contains("slot") || !j["slot"].is_number_integer())
    raise(ErrorKind::Schema, "missing integer field: slot");
  req.slot = j["slot"].get<int>();
  if (j.contains("strategy"))
    req.strategy = parse_strategy(j["strategy"].get<std::string>());
  const bool has_polygon = j.contains("polygon");
  const bool has_mask = j.contains("mask");
  if (has_polygon == has_mask)
    raise(ErrorKind::Schema, "need exactly one of polygon and mask");
  if (has_polygon) {
    std::vector<GeoPoint> poly;
    for (const auto& p : j["polygon"]) {
      if (!p.is_array() || p.size() != 2)
        raise(ErrorKind::Schema, "polygon entries must be [lat, lng]");
      poly.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    req.polygon = std::move(poly);
  } else {
    RasterRegion region;
    region.mask = SignedGrid(cfg.height(), cfg.width());
    for (const auto& cell : j["mask"]["cells"]) {
      if (!cell.is_array() || cell.size() != 2)
        raise(ErrorKind::Schema, "mask cells must be [row, col]");
      const int r = cell[0].get<int>();
      const int c = cell[1].get<int>();
      if (r < 0 || c < 0 || r >= cfg.raw_height() || c >= cfg.raw_width())
        raise(ErrorKind::Schema, "mask cell outside the raster");
      region.mask.at(r, c) = 1;
    }
    req.mask = std::move(region);
  }
  return req;
}

inline json response_json(const QueryResponse& resp) {
  json grids = json::array();
  for (const auto& g : resp.grids)
    grids.push_back({{"code", g.code}, {"trace", g.trace}});
  return json{{"value", resp.value},
              {"grids", grids},
              {"timing_us",
               {{"decompose", resp.decompose_us},
                {"lookup", resp.lookup_us},
                {"aggregate", resp.aggregate_us},
                {"total", resp.total_us}}}};
}

inline int status_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::EmptyRegion: return 422;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Schema: return 400;
    case ErrorKind::Config: return 503;
    default: return 500;
  }
}

}  // namespace http_detail

// Blocking HTTP front end: POST /predict, GET /health, GET /stats.
inline int run_http_server(QueryService& service, const std::string& host,
                           int port) {
  using http_detail::json;
  httplib::Server server;

  server.Post("/predict", [&](const httplib::Request& req,
                              httplib::Response& res) {
    try {
      const QueryRequest query =
          http_detail::parse_request(req.body, service.hierarchy());
      const QueryResponse out = service.handle_query(query);
      res.set_content(http_detail::response_json(out).dump(), "application/json");
    } catch (const Error& e) {
      res.status = http_detail::status_for(e);
      res.set_content(json{{"error", e.what()}}.dump(), "application/json");
    }
  });

  server.Get("/health", [&](const httplib::Request&, httplib::Response& res) {
    const HealthReport h = service.health();
    res.set_content(
        json{{"ready", h.ready},
             {"slot_range", {h.slot_range.begin, h.slot_range.end}}}
            .dump(),
        "application/json");
  });

  server.Get("/stats", [&](const httplib::Request&, httplib::Response& res) {
    const StatsReport s = service.stats();
    res.set_content(json{{"ready", s.ready},
                         {"slot_range", {s.slot_range.begin, s.slot_range.end}},
                         {"snapshot_digest", s.snapshot_digest},
                         {"queries", s.queries},
                         {"errors", s.errors},
                         {"latency_us",
                          {{"p50", s.p50_us}, {"p99", s.p99_us}, {"max", s.max_us}}}}
                        .dump(),
                    "application/json");
  });

  return server.listen(host, port) ? 0 : 1;
}

}  // namespace o4ast

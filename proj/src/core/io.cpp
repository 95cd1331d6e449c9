#include "neklab/core/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>

#include "neklab/errors.hpp"

namespace neklab::core {

json to_json(const TrigPoly& g) {
  json terms = json::array();
  for (const auto& [k, p] : g.terms()) {
    json poly = json::array();
    for (const auto& [e, c] : p.terms())
      poly.push_back({{"powers", e}, {"re", c.real()}, {"im", c.imag()}});
    terms.push_back({{"k", k.entries()}, {"poly", std::move(poly)}});
  }
  return {{"schema", kTrigPolySchema}, {"n", g.dim()}, {"terms", std::move(terms)}};
}

TrigPoly trig_poly_from_json(const json& j) {
  if (!j.contains("schema") || j.at("schema") != kTrigPolySchema)
    throw DomainError("trig_poly_from_json: unsupported schema");
  const auto n = j.at("n").get<std::size_t>();
  TrigPoly g(n);
  for (const auto& t : j.at("terms")) {
    MultiIndex k(t.at("k").get<std::vector<int>>());
    if (k.size() != n) throw DomainError("trig_poly_from_json: harmonic length mismatch");
    Polynomial p(n);
    for (const auto& m : t.at("poly"))
      p.add_term(m.at("powers").get<std::vector<int>>(), cplx(m.at("re").get<double>(), m.at("im").get<double>()));
    g.add(k, p);
  }
  return g;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_grid(std::ostream& os, const GridFunction& f, GridFormat format) {
  json axes = json::array();
  for (const auto& a : f.axes())
    axes.push_back({{"lo", a.lo}, {"hi", a.hi}, {"nodes", a.nodes}, {"periodic", a.periodic}});
  json header = {{"schema", kGridSchema},
                 {"format", format == GridFormat::csv ? "csv" : "binary"},
                 {"axes", std::move(axes)}};
  os << header.dump() << '\n';
  if (format == GridFormat::csv) {
    for (double v : f.values()) os << format_double(v) << '\n';
  } else {
    static_assert(std::endian::native == std::endian::little, "binary grids assume little-endian hosts");
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  }
}

GridFunction read_grid(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("read_grid: missing header");
  const json header = json::parse(line);
  if (header.value("schema", "") != kGridSchema) throw DomainError("read_grid: unsupported schema");
  std::vector<Axis> axes;
  for (const auto& a : header.at("axes"))
    axes.push_back(Axis{a.at("lo").get<double>(), a.at("hi").get<double>(), a.at("nodes").get<std::size_t>(),
                        a.at("periodic").get<bool>()});
  GridFunction g(axes);
  auto& v = g.values();
  if (header.at("format") == "csv") {
    for (auto& x : v) {
      if (!std::getline(is, line)) throw DomainError("read_grid: truncated payload");
      auto res = std::from_chars(line.data(), line.data() + line.size(), x);
      if (res.ec != std::errc()) throw DomainError("read_grid: malformed value");
    }
  } else {
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != v.size() * sizeof(double))
      throw DomainError("read_grid: truncated payload");
  }
  return g;
}

}  // namespace neklab::core

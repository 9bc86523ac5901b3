#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "solscale/experiment.hpp"
#include "solscale/glued.hpp"
#include "solscale/map_format.hpp"
#include "solscale/scaling.hpp"

namespace py = pybind11;
using namespace solscale;

namespace {

NetIndex make_index(const std::vector<std::int64_t>& k, const std::vector<std::int64_t>& m) {
  return NetIndex(KVec(std::span<const std::int64_t>(k)), MVec(std::span<const std::int64_t>(m)));
}

py::tuple index_tuple(const NetIndex& idx) {
  std::vector<std::int64_t> k(idx.k.begin(), idx.k.end()), m(idx.m.begin(), idx.m.end());
  return py::make_tuple(k, m);
}

Box make_box(const std::vector<std::pair<double, double>>& x, const std::vector<std::pair<double, double>>& t) {
  std::vector<Interval> xi, ti;
  for (auto [a, b] : x) xi.push_back({a, b});
  for (auto [a, b] : t) ti.push_back({a, b});
  return Box(xi, ti);
}

std::vector<Box> doubling(int rank, int j0, int j1, double theta, std::vector<double> offset) {
  std::vector<Box> out;
  for (int j = j0; j <= j1; ++j) {
    FolnerBoxOptions o;
    o.height_fraction = theta;
    o.x_offset = offset;
    out.push_back(folner_box(std::vector<double>(static_cast<std::size_t>(2 * rank), std::ldexp(1.0, j)), o));
  }
  return out;
}

py::dict report_dict(const ScalingReport& r) {
  py::list rows;
  for (const auto& row : r.rows)
    rows.append(py::dict(py::arg("set_index") = row.set_index, py::arg("set_size") = row.set_size,
                         py::arg("preimage_size") = row.preimage_size, py::arg("boundary_size") = row.boundary_size,
                         py::arg("ratio") = row.ratio, py::arg("residual") = row.residual));
  return py::dict(py::arg("limit") = r.limit, py::arg("converged") = r.converged,
                  py::arg("max_residual") = r.max_residual, py::arg("rows") = rows, py::arg("warnings") = r.warnings);
}

}  // namespace

PYBIND11_MODULE(_solscale, mod) {
  mod.doc() = "Scaling-group experiments on Sol-type lattices";

  // Translators run newest first, so the base class goes first.
  py::register_exception<Error>(mod, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(mod, "DomainError", PyExc_ValueError);
  py::register_exception<RangeError>(mod, "RangeError", PyExc_ValueError);
  py::register_exception<ResourceError>(mod, "ResourceError", PyExc_RuntimeError);

  mod.def("special_box_diameter", [](int rank) { return special_box_diameter(GroupSpec(rank)); }, py::arg("rank") = 1);
  mod.def("net_separation_constant", &net_separation_constant);
  mod.def("hyperbolic_distance", &hyperbolic_distance);

  mod.def(
      "net_point",
      [](const std::vector<std::int64_t>& k, const std::vector<std::int64_t>& m) {
        const GroupPoint p = net_point(make_index(k, m));
        return py::make_tuple(std::vector<double>(p.x().begin(), p.x().end()),
                              std::vector<double>(p.t().begin(), p.t().end()));
      },
      py::arg("k"), py::arg("m"), "Group point (x, t) of the net index (k, m).");
  mod.def(
      "round_to_net",
      [](const std::vector<double>& x, const std::vector<double>& t) {
        const int n = static_cast<int>(x.size()) / 2;
        return index_tuple(round_to_net(GroupPoint(GroupSpec(n), std::span<const double>(x), std::span<const double>(t))));
      },
      py::arg("x"), py::arg("t"), "Net index (k, m) of the special box containing (x, t).");
  mod.def(
      "net_distance",
      [](const std::vector<std::int64_t>& k1, const std::vector<std::int64_t>& m1, const std::vector<std::int64_t>& k2,
         const std::vector<std::int64_t>& m2) {
        const NetIndex a = make_index(k1, m1);
        return NetSpace(a.spec()).distance(a, make_index(k2, m2));
      },
      py::arg("k1"), py::arg("m1"), py::arg("k2"), py::arg("m2"));
  mod.def(
      "ball_size",
      [](const std::vector<std::int64_t>& k, const std::vector<std::int64_t>& m, double r) {
        const NetIndex c = make_index(k, m);
        return ball_size(NetSpace(c.spec()), c, r);
      },
      py::arg("k"), py::arg("m"), py::arg("r"));

  mod.def(
      "count_net", [](const std::vector<std::pair<double, double>>& x, const std::vector<std::pair<double, double>>& t) {
        return count_net(make_box(x, t));
      },
      py::arg("x"), py::arg("t"), "Net points in the box prod [lo, hi).");
  mod.def(
      "haar_measure",
      [](const std::vector<std::pair<double, double>>& x, const std::vector<std::pair<double, double>>& t) {
        return haar_measure(make_box(x, t));
      },
      py::arg("x"), py::arg("t"));

  mod.def(
      "folner_ratios",
      [](int rank, int j_from, int j_to, double height_fraction, double r) {
        const NetSpace net{GroupSpec(rank)};
        return profile_family(net, box_family(doubling(rank, j_from, j_to, height_fraction, {})), r).folner_ratios();
      },
      py::arg("rank") = 1, py::arg("j_from") = 3, py::arg("j_to") = 7, py::arg("height_fraction") = 1.0,
      py::arg("r") = 1.0, "|boundary_r S_j| / |S_j| along doubling boxes with truncated heights.");

  mod.def(
      "estimate_scaling",
      [](const std::vector<std::string>& stages, int rank, int j_from, int j_to, double height_fraction,
         std::vector<double> offset, double radius, double tol) {
        const GroupSpec spec(rank);
        ScalingOptions opts;
        opts.radius = radius;
        opts.convergence_tol = tol;
        return report_dict(estimate_scaling(NetSpace(spec), parse_map(spec, stages),
                                            box_family(doubling(rank, j_from, j_to, height_fraction, offset)), opts));
      },
      py::arg("stages"), py::arg("rank") = 1, py::arg("j_from") = 3, py::arg("j_to") = 8,
      py::arg("height_fraction") = 0.25, py::arg("offset") = std::vector<double>{}, py::arg("radius") = 1.0,
      py::arg("tol") = 1e-2, "Preimage ratios of a map given in the text stage format along a doubling family.");

  mod.def(
      "attachment_drift",
      [](double gamma, double m, int J) {
        GluedSpaceSpec s;
        s.gammas = {gamma};
        return attachment_drift(GluedSpace(s), m, 1, J);
      },
      py::arg("gamma"), py::arg("m"), py::arg("J"));
  mod.def("default_index_range", &default_index_range, py::arg("gamma"));
  mod.def("multiplicity_bound", &multiplicity_bound, py::arg("gamma"));

  mod.def(
      "run_experiment",
      [](const std::string& sub, const std::string& config, const std::filesystem::path& out) {
        const auto o = run_experiment(sub, config, out);
        return py::make_tuple(o.exit_code, o.status);
      },
      py::arg("subcommand"), py::arg("config_json"), py::arg("out_dir"),
      "Runs one CLI experiment in-process; returns (exit_code, status).");
  mod.attr("subcommands") = subcommands();
}

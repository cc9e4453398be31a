#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dc2b/data_io.hpp"
#include "dc2b/dpp.hpp"
#include "dc2b/evaluation.hpp"
#include "dc2b/posterior.hpp"

namespace py = pybind11;
using namespace dc2b;

namespace {

using Ids = std::vector<ItemId>;

dpp::MapObjective objective(double quality_weight, double det_weight) { return {quality_weight, det_weight}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "DPP-based combinatorial bandit core";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<ItemCatalog>(m, "ItemCatalog")
      .def(py::init<std::vector<RawId>, RowMatrix, std::vector<CategorySet>>(), py::arg("raw_ids"),
           py::arg("features"), py::arg("categories") = std::vector<CategorySet>{})
      .def("__len__", &ItemCatalog::size)
      .def_property_readonly("dim", &ItemCatalog::dim)
      .def_property_readonly("features", &ItemCatalog::features)
      .def_property_readonly("raw_ids", &ItemCatalog::raw_ids)
      .def("categories", &ItemCatalog::categories, py::arg("item"));

  py::class_<dpp::Kernel>(m, "Kernel")
      .def_static(
          "from_matrix",
          [](Matrix L, std::optional<Vector> log_quality) { return dpp::Kernel::from_matrix(std::move(L), log_quality); },
          py::arg("L"), py::arg("log_quality") = std::nullopt)
      .def("__len__", &dpp::Kernel::size)
      .def_property_readonly("matrix", &dpp::Kernel::matrix)
      .def_property_readonly("log_quality", &dpp::Kernel::log_quality)
      .def_property_readonly("log_scale", &dpp::Kernel::log_scale)
      .def_property_readonly("ids", &dpp::Kernel::ids)
      .def("log_normalizer", &dpp::Kernel::log_normalizer);

  py::class_<dpp::Slate>(m, "Slate")
      .def_readonly("items", &dpp::Slate::items)
      .def_readonly("gains", &dpp::Slate::gains)
      .def_readonly("objective", &dpp::Slate::objective)
      .def("__len__", &dpp::Slate::size)
      .def("__repr__", [](const dpp::Slate& s) { return "Slate(" + py::repr(py::cast(s.items)).cast<std::string>() + ")"; });

  m.def(
      "build_kernel", [](const Vector& theta, const ItemCatalog& items, double alpha, const Ids& ids) {
        return dpp::build_kernel(theta, items, alpha, ids);
      },
      py::arg("theta"), py::arg("items"), py::arg("alpha"), py::arg("ids") = Ids{});
  m.def(
      "subset_log_det", [](const dpp::Kernel& k, const Ids& s) { return dpp::subset_log_det(k, s); }, py::arg("kernel"),
      py::arg("subset"));
  m.def(
      "slate_probability", [](const dpp::Kernel& k, const Ids& s) { return dpp::slate_probability(k, s); },
      py::arg("kernel"), py::arg("subset"));
  m.def(
      "greedy_map",
      [](const dpp::Kernel& k, std::size_t K, const Ids& c, double qw, double dw) {
        return dpp::greedy_map(k, K, c, objective(qw, dw));
      },
      py::arg("kernel"), py::arg("K"), py::arg("candidates"), py::arg("quality_weight") = 1.0,
      py::arg("det_weight") = 1.0);
  m.def(
      "exhaustive_map",
      [](const dpp::Kernel& k, std::size_t K, const Ids& c, double qw, double dw) {
        return dpp::exhaustive_map(k, K, c, objective(qw, dw));
      },
      py::arg("kernel"), py::arg("K"), py::arg("candidates"), py::arg("quality_weight") = 1.0,
      py::arg("det_weight") = 1.0);

  py::class_<posterior::PosteriorState>(m, "PosteriorState")
      .def(py::init([](Vector mean, Matrix cov) {
             posterior::PosteriorState s{std::move(mean), std::move(cov)};
             s.validate();
             return s;
           }),
           py::arg("mean"), py::arg("covariance"))
      .def_static("prior", &posterior::PosteriorState::prior, py::arg("dim"), py::arg("lam") = 1.0)
      .def_readonly("mean", &posterior::PosteriorState::mean)
      .def_readonly("covariance", &posterior::PosteriorState::covariance)
      .def_readonly("trial_count", &posterior::PosteriorState::trial_count);

  py::class_<posterior::UpdateResult>(m, "UpdateResult")
      .def_readonly("state", &posterior::UpdateResult::state)
      .def_property_readonly("xi", [](const posterior::UpdateResult& r) { return r.aux.xi; })
      .def_property_readonly("iterations", [](const posterior::UpdateResult& r) { return r.aux.iterations_used; })
      .def_property_readonly("converged", [](const posterior::UpdateResult& r) { return r.aux.converged; })
      .def_property_readonly("bound_trace", [](const posterior::UpdateResult& r) { return r.aux.bound_trace; });

  m.def("lambda_of_xi", &posterior::lambda_of_xi, py::arg("xi"));
  m.def("logistic_lower_bound", &posterior::logistic_lower_bound, py::arg("x"), py::arg("xi"));
  m.def(
      "update_features",
      [](const posterior::PosteriorState& s, const RowMatrix& X, const std::vector<double>& y, double alpha, double tol,
         int max_iter) { return posterior::update_features(s, X, y, alpha, {tol, max_iter}); },
      py::arg("state"), py::arg("features"), py::arg("feedback"), py::arg("alpha"), py::arg("tol") = 1e-6,
      py::arg("max_iter") = 100);
  m.def(
      "update",
      [](const posterior::PosteriorState& s, const Ids& slate, const std::vector<double>& y, const ItemCatalog& items,
         double alpha, double tol, int max_iter) {
        return posterior::update(s, slate, y, items, alpha, {tol, max_iter});
      },
      py::arg("state"), py::arg("slate"), py::arg("feedback"), py::arg("items"), py::arg("alpha"),
      py::arg("tol") = 1e-6, py::arg("max_iter") = 100);
  m.def("sample_theta", &posterior::sample_theta, py::arg("state"), py::arg("seed"));

  m.def("f_measure", &eval::f_measure, py::arg("accuracy"), py::arg("diversity"));
  m.def(
      "slate_ild", [](const Ids& slate, const ItemCatalog& items) { return eval::slate_ild(slate, items); },
      py::arg("slate"), py::arg("items"));

  m.def(
      "simulate_regret",
      [](const std::string& policy, std::size_t dim, std::size_t n_items, double env_alpha, std::size_t slate_size,
         std::size_t horizon, std::size_t episodes, Seed seed) {
        eval::SyntheticEnvSpec env;
        env.dim = dim;
        env.items = n_items;
        env.alpha = env_alpha;
        eval::RegretOptions opts;
        opts.policy = eval::parse_regret_policy(policy);
        opts.slate_size = slate_size;
        opts.horizon = horizon;
        opts.episodes = episodes;
        opts.seed = seed;
        py::gil_scoped_release release;
        return eval::simulate_regret(env, opts).cumulative;
      },
      py::arg("policy") = "dc2b", py::arg("dim") = 5, py::arg("items") = 12, py::arg("env_alpha") = 0.1,
      py::arg("slate_size") = 3, py::arg("horizon") = 2000, py::arg("episodes") = 20, py::arg("seed") = 2024,
      "Mean cumulative regret per trial.");

  m.def(
      "dataset_stats",
      [](const std::filesystem::path& dir, const std::string& format, std::optional<int> threshold) {
        const auto f = data::parse_dataset_format(format);
        const auto s = data::load_dataset(dir, f, threshold.value_or(data::default_threshold(f))).stats;
        py::dict d;
        d["users"] = s.users;
        d["items"] = s.items;
        d["interactions"] = s.interactions;
        d["density"] = s.density;
        return d;
      },
      py::arg("data_dir"), py::arg("format") = "ml100k", py::arg("threshold") = std::nullopt);
}

// Python bindings over the scoring, loss and metric core. Matrices cross the
// boundary as numpy arrays; loss results come back as small dicts so the
// gradients stay alongside the values they belong to.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "sdl/eval.hpp"
#include "sdl/gradcheck.hpp"
#include "sdl/loss.hpp"
#include "sdl/model.hpp"
#include "sdl/optim.hpp"

namespace py = pybind11;
using namespace py::literals;

namespace {

sdl::LossConfig make_config(const sdl::Mat& a, const std::string& variant,
                            double lambda, bool use_sdw) {
  sdl::LossConfig cfg;
  cfg.variant = sdl::variant_from_string(variant);
  cfg.lambda = lambda;
  cfg.use_sdw = use_sdw;
  cfg.m = static_cast<int>(a.rows());
  sdl::validate(cfg);
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "zero-shot multi-label tag ranking: scoring, losses, metrics";

  py::register_exception<sdl::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<sdl::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("softplus", &sdl::softplus, "u"_a);
  m.def("sigmoid", &sdl::sigmoid, "u"_a);
  m.def("lambda_tilde", &sdl::lambda_tilde, "lam"_a, "n_negatives"_a,
        "Per-image blend weight min(1, lam / n_negatives).");

  m.def(
      "score",
      [](const sdl::Mat& a, const sdl::Vec& t) {
        const auto r = sdl::score(a, t);
        return py::make_tuple(r.value, static_cast<long>(r.row));
      },
      "a"_a, "t"_a,
      "Relevance of tag vector t under embedding matrix a: (max over rows of "
      "a @ t, winning row index).");

  m.def("sdw", &sdl::sdw, "positives"_a,
        "Semantic diversity weight: 1 + summed per-dimension variance of the "
        "positive tag vectors (rows).");

  m.def(
      "rank_loss",
      [](const sdl::Mat& a, const sdl::Mat& positives, const sdl::Mat& negatives,
         bool use_sdw, const std::string& variant) {
        const sdl::LabelInstance inst{positives, negatives};
        const auto r = sdl::rank_loss(a, inst, use_sdw, sdl::variant_from_string(variant));
        return py::dict("value"_a = r.value, "grad"_a = r.grad_a,
                        "omega_d"_a = r.omega_d);
      },
      "a"_a, "positives"_a, "negatives"_a, "use_sdw"_a = true, "variant"_a = "max",
      "Pairwise ranking loss over all positive/negative tag pairs with its "
      "gradient w.r.t. a.");

  m.def(
      "reg_loss",
      [](const sdl::Mat& a) {
        const auto r = sdl::reg_loss(a);
        return py::dict("value"_a = r.value, "grad"_a = r.grad_a);
      },
      "a"_a,
      "Row-diversity penalty: summed per-column variance over the rows of a.");

  m.def(
      "final_loss",
      [](const sdl::Mat& a, const sdl::Mat& positives, const sdl::Mat& negatives,
         const std::string& variant, double lam, bool use_sdw) {
        const sdl::LabelInstance inst{positives, negatives};
        const auto r = sdl::final_loss(a, inst, make_config(a, variant, lam, use_sdw));
        return py::dict("value"_a = r.value, "grad"_a = r.grad_a, "l_rank"_a = r.l_rank,
                        "l_reg"_a = r.l_reg, "omega_d"_a = r.omega_d,
                        "lambda_tilde"_a = r.lambda_t);
      },
      "a"_a, "positives"_a, "negatives"_a, "variant"_a = "max", "lam"_a = 0.3,
      "use_sdw"_a = true,
      "Blend (1 - lambda_tilde) * rank + lambda_tilde * reg with its gradient.");

  m.def(
      "average_precision",
      [](const std::vector<double>& scores, const std::vector<bool>& relevant) {
        return sdl::average_precision(scores,
                                      std::vector<char>(relevant.begin(), relevant.end()));
      },
      "scores"_a, "relevant"_a,
      "Average precision of one ranking; descending scores, ties in index order.");

  m.def(
      "one_cycle_lr",
      [](double max_lr, long total_steps, long t) {
        sdl::OptimConfig cfg;
        cfg.max_lr = max_lr;
        cfg.total_steps = total_steps;
        return sdl::lr_at(cfg, t);
      },
      "max_lr"_a, "total_steps"_a, "t"_a,
      "Learning rate at step t: linear warmup then cosine decay.");

  m.def(
      "gradcheck",
      [](int instances, double step, double tol, std::uint64_t seed) {
        sdl::GradCheckConfig cfg;
        cfg.instances = instances;
        cfg.step = step;
        cfg.tol = tol;
        cfg.seed = seed;
        const auto r = sdl::run_gradcheck(cfg);
        py::dict stats;
        for (const auto& st : r.stats) stats[py::str(st.name)] = st.max_rel_err;
        return py::dict("pass"_a = r.pass, "worst"_a = r.worst, "stats"_a = stats,
                        "resampled"_a = r.resampled_degenerate);
      },
      "instances"_a = 20, "step"_a = 1e-5, "tol"_a = 1e-4, "seed"_a = 0,
      "Analytic gradients vs central finite differences over seeded instances.");
}

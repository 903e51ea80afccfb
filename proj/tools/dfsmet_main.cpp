// Command-line front end: DFS geometry, QFIM evaluation, strategy
// improvement, rate optimization and the shot-level readout simulator.

#include "dfsmet/dfs.hpp"
#include "dfsmet/improve.hpp"
#include "dfsmet/io.hpp"
#include "dfsmet/model.hpp"
#include "dfsmet/optimize.hpp"
#include "dfsmet/qfim.hpp"
#include "dfsmet/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

namespace {

using dfsmet::Error;
using dfsmet::ErrorCode;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDfs: return 3;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ShapeMismatch: return 4;
    case ErrorCode::NotInDfs: return 5;
    case ErrorCode::UnidentifiableSignals:
    case ErrorCode::SingularQfim: return 6;
    case ErrorCode::PhaseWrap: return 7;
    default: return 1;
  }
}

struct Options {
  std::string network_path;
  std::string strategy_path;
  std::string weights_path;
  std::string output = "text";
  std::string noise_mode = "off";
  std::vector<double> noise_sigma;
  std::vector<double> alpha;
  double tol = dfsmet::kDefaultTol;
  long long shots = 100000;
  int repetitions = 200;
  std::uint64_t seed = 1;
};

void print_matrix_csv(std::ostream& out, const std::string& name,
                      const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << name << ',' << r << ',' << c << ',' << m(r, c) << '\n';
    }
  }
}

Eigen::IOFormat text_format() {
  return Eigen::IOFormat(Eigen::StreamPrecision, 0, "  ", "\n", "  [", "]");
}

dfsmet::NoiseModel noise_from_options(const Options& options,
                                      Eigen::Index noise_sources) {
  if (options.noise_mode == "off") return dfsmet::NoiseModel::off();
  if (options.noise_mode == "infinite") return dfsmet::NoiseModel::infinite();
  if (options.noise_mode == "gaussian") {
    Eigen::VectorXd sigma(noise_sources);
    if (options.noise_sigma.size() == 1) {
      sigma.setConstant(options.noise_sigma.front());
    } else if (static_cast<Eigen::Index>(options.noise_sigma.size()) ==
               noise_sources) {
      for (Eigen::Index i = 0; i < noise_sources; ++i) {
        sigma[i] = options.noise_sigma[static_cast<std::size_t>(i)];
      }
    } else {
      throw dfsmet::ParseError(
          "--noise-sigma needs one value or one per noise source");
    }
    return dfsmet::NoiseModel::gaussian(sigma);
  }
  throw dfsmet::ParseError("--noise-mode must be off, gaussian or infinite");
}

int cmd_dfs(const Options& options) {
  const dfsmet::SensorNetwork network = dfsmet::read_network(options.network_path);
  if (network.sensors() > 14) {
    std::cerr << "warning: vertex enumeration is combinatorial; "
              << network.sensors() << " sensors may take a long time\n";
  }
  // --tol overrides the kernel rank tolerance here.
  const double rank_tol =
      options.tol == dfsmet::kDefaultTol ? dfsmet::kRankTol : options.tol;
  const dfsmet::DfsPolytope polytope =
      dfsmet::enumerate_vertices(network, rank_tol);

  if (options.output == "json") {
    json vertices = json::array();
    for (const auto& v : polytope.vertices()) {
      vertices.push_back(dfsmet::vector_json(v.vec()));
    }
    json out{{"dimension", polytope.dimension()},
             {"kernel_basis", dfsmet::matrix_json(polytope.kernel_basis())},
             {"vertices", std::move(vertices)}};
    std::cout << out.dump(2) << '\n';
  } else if (options.output == "csv") {
    std::cout << "vertex";
    for (Eigen::Index j = 0; j < polytope.sensors(); ++j) std::cout << ",k" << j;
    std::cout << '\n';
    for (std::size_t i = 0; i < polytope.vertices().size(); ++i) {
      std::cout << i;
      const auto& v = polytope.vertices()[i].vec();
      for (Eigen::Index j = 0; j < v.size(); ++j) std::cout << ',' << v[j];
      std::cout << '\n';
    }
  } else {
    std::cout << "DFS dimension: " << polytope.dimension() << "\n";
    std::cout << "kernel basis (columns):\n"
              << polytope.kernel_basis().format(text_format()) << "\n";
    std::cout << "vertices (" << polytope.vertices().size() << "):\n";
    for (const auto& v : polytope.vertices()) {
      std::cout << "  " << v.vec().transpose() << "\n";
    }
  }
  return 0;
}

int cmd_qfim(const Options& options) {
  const dfsmet::SensorNetwork network = dfsmet::read_network(options.network_path);
  const dfsmet::StrategyVariant strategy =
      dfsmet::read_strategy(options.strategy_path);

  const bool infinite_noise = options.noise_mode == "infinite";
  std::string route;
  dfsmet::KMatrix k = [&]() {
    if (const auto* pure = std::get_if<dfsmet::PureStrategy>(&strategy)) {
      if (infinite_noise) {
        route = "dephased_mixed";
        return dfsmet::k_matrix_mixed(
            dfsmet::dephase(*pure, network, options.tol));
      }
      route = "pure";
      return dfsmet::k_matrix_pure(*pure);
    }
    const auto& sequential = std::get<dfsmet::SequentialStrategy>(strategy);
    if (infinite_noise) {
      // GHZ terms that leave the DFS are fully dephased and contribute
      // nothing; drop them and keep the surviving rates.
      std::vector<dfsmet::SequentialTerm> kept;
      for (const auto& term : sequential.terms()) {
        if ((network.noise() * term.k.vec()).lpNorm<Eigen::Infinity>() <=
            options.tol) {
          kept.push_back(term);
        }
      }
      route = "dephased_sequential";
      const Eigen::Index n = network.sensors();
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
      for (const auto& term : kept) {
        sum += term.rate * term.k.vec() * term.k.vec().transpose();
      }
      return dfsmet::KMatrix(sum);
    }
    route = "sequential";
    return dfsmet::k_matrix_sequential(sequential);
  }();

  const dfsmet::Qfim qfim = dfsmet::qfim_from_k(network, k);
  const dfsmet::DfsPolytope polytope = dfsmet::enumerate_vertices(network);
  const bool trace_extremal =
      dfsmet::is_extremal_trace(k, polytope, std::max(options.tol, 1e-9));
  const bool vertex_certificate =
      std::holds_alternative<dfsmet::SequentialStrategy>(strategy) &&
      dfsmet::certify_vertex_sequential(
          std::get<dfsmet::SequentialStrategy>(strategy), polytope,
          std::max(options.tol, 1e-8));

  if (options.output == "json") {
    json out{{"route", route},
             {"k_matrix", dfsmet::matrix_json(k.mat())},
             {"qfim", dfsmet::matrix_json(qfim.mat())},
             {"trace", k.trace()},
             {"max_attainable_trace", dfsmet::max_attainable_trace(polytope)},
             {"trace_extremal", trace_extremal},
             {"vertex_certificate", vertex_certificate}};
    std::cout << out.dump(2) << '\n';
  } else if (options.output == "csv") {
    std::cout << "matrix,row,col,value\n";
    print_matrix_csv(std::cout, "K", k.mat());
    print_matrix_csv(std::cout, "F", qfim.mat());
    std::cout << "trace,,," << k.trace() << '\n';
    std::cout << "trace_extremal,,," << trace_extremal << '\n';
    std::cout << "vertex_certificate,,," << vertex_certificate << '\n';
  } else {
    std::cout << "route: " << route << "\n";
    std::cout << "K matrix:\n" << k.mat().format(text_format()) << "\n";
    std::cout << "QFIM (T = " << qfim.time() << "):\n"
              << qfim.mat().format(text_format()) << "\n";
    std::cout << "trace(K) = " << k.trace()
              << " (max attainable " << dfsmet::max_attainable_trace(polytope)
              << ")\n";
    std::cout << "trace criterion: " << (trace_extremal ? "extremal" : "inconclusive")
              << "\n";
    std::cout << "vertex certificate: " << (vertex_certificate ? "yes" : "no")
              << "\n";
  }
  return 0;
}

int cmd_improve(const Options& options) {
  const dfsmet::SensorNetwork network = dfsmet::read_network(options.network_path);
  const dfsmet::StrategyVariant strategy =
      dfsmet::read_strategy(options.strategy_path);
  const auto* pure = std::get_if<dfsmet::PureStrategy>(&strategy);
  if (pure == nullptr) {
    throw dfsmet::ParseError("improve expects a pure strategy file");
  }
  const dfsmet::ImprovementTrace trace =
      dfsmet::improve_pipeline(*pure, network, options.tol);

  json stages = json::array();
  for (std::size_t i = 0; i < trace.stages.size(); ++i) {
    const auto& entry = trace.stages[i];
    json stage{{"stage", dfsmet::to_string(entry.stage)},
               {"strategy", dfsmet::to_json(entry.strategy)},
               {"k_matrix", dfsmet::matrix_json(entry.k_matrix.mat())},
               {"trace", entry.k_matrix.trace()}};
    if (i > 0) {
      stage["psd_step"] = dfsmet::to_string(dfsmet::psd_compare(
          entry.k_matrix.mat(), trace.stages[i - 1].k_matrix.mat()));
    }
    stages.push_back(std::move(stage));
  }

  if (options.output == "json") {
    std::cout << json{{"stages", std::move(stages)}}.dump(2) << '\n';
  } else if (options.output == "csv") {
    std::cout << "stage,row,col,value\n";
    for (const auto& entry : trace.stages) {
      print_matrix_csv(std::cout, dfsmet::to_string(entry.stage),
                       entry.k_matrix.mat());
    }
  } else {
    for (std::size_t i = 0; i < trace.stages.size(); ++i) {
      const auto& entry = trace.stages[i];
      std::cout << "stage " << dfsmet::to_string(entry.stage)
                << ": trace(K) = " << entry.k_matrix.trace();
      if (i > 0) {
        std::cout << ", step "
                  << dfsmet::to_string(dfsmet::psd_compare(
                         entry.k_matrix.mat(),
                         trace.stages[i - 1].k_matrix.mat()));
      }
      std::cout << "\n" << entry.k_matrix.mat().format(text_format()) << "\n";
    }
    std::cout << "final strategy:\n";
    for (const auto& term : trace.final_strategy().terms()) {
      std::cout << "  rate " << term.rate << " at " << term.k.vec().transpose()
                << "\n";
    }
  }
  return 0;
}

int cmd_optimize(const Options& options) {
  const dfsmet::SensorNetwork network = dfsmet::read_network(options.network_path);
  const dfsmet::WeightMatrix weights =
      options.weights_path.empty()
          ? dfsmet::WeightMatrix::identity(network.signals())
          : dfsmet::read_weights(options.weights_path);
  const dfsmet::DfsPolytope polytope = dfsmet::enumerate_vertices(network);

  std::string path = "mirror_descent";
  dfsmet::RateSolution solution = [&]() {
    try {
      dfsmet::RateSolution closed =
          dfsmet::optimal_rates_orthogonal(polytope, network, weights);
      path = "closed_form";
      return closed;
    } catch (const Error& error) {
      if (error.code() != ErrorCode::NonOrthogonalVertices &&
          error.code() != ErrorCode::SingularRestrictedSignal) {
        throw;
      }
      return dfsmet::optimize_rates(polytope, network, weights);
    }
  }();

  if (options.output == "json") {
    json rates = json::array();
    for (const auto& [index, rate] : solution.rates) {
      rates.push_back(json{
          {"vertex", index},
          {"k", dfsmet::vector_json(
                    polytope.vertices()[static_cast<std::size_t>(index)].vec())},
          {"rate", rate}});
    }
    json out{{"path", path},
             {"rates", std::move(rates)},
             {"objective", solution.objective},
             {"iterations", solution.iterations},
             {"converged", solution.converged}};
    std::cout << out.dump(2) << '\n';
  } else if (options.output == "csv") {
    std::cout << "key,index,value\n";
    for (const auto& [index, rate] : solution.rates) {
      std::cout << "rate," << index << ',' << rate << '\n';
    }
    std::cout << "objective,," << solution.objective << '\n';
    std::cout << "iterations,," << solution.iterations << '\n';
    std::cout << "converged,," << solution.converged << '\n';
    std::cout << "path,," << path << '\n';
  } else {
    std::cout << "solver path: " << path << "\n";
    for (const auto& [index, rate] : solution.rates) {
      std::cout << "  rate " << rate << " at vertex " << index << " = "
                << polytope.vertices()[static_cast<std::size_t>(index)]
                       .vec()
                       .transpose()
                << "\n";
    }
    std::cout << "objective tr(W F^-1) = " << solution.objective << "\n";
    std::cout << "iterations: " << solution.iterations
              << ", converged: " << (solution.converged ? "yes" : "no") << "\n";
  }
  return 0;
}

int cmd_simulate(const Options& options) {
  const dfsmet::SensorNetwork network = dfsmet::read_network(options.network_path);
  const dfsmet::StrategyVariant strategy =
      dfsmet::read_strategy(options.strategy_path);
  const auto* sequential = std::get_if<dfsmet::SequentialStrategy>(&strategy);
  if (sequential == nullptr) {
    throw dfsmet::ParseError("simulate expects a sequential strategy file");
  }
  if (options.alpha.empty()) {
    throw dfsmet::ParseError("simulate needs --alpha");
  }
  Eigen::VectorXd alpha(static_cast<Eigen::Index>(options.alpha.size()));
  for (std::size_t i = 0; i < options.alpha.size(); ++i) {
    alpha[static_cast<Eigen::Index>(i)] = options.alpha[i];
  }
  const dfsmet::NoiseModel noise =
      noise_from_options(options, network.noise_sources());

  const dfsmet::EstimationReport report = dfsmet::estimate_parameters(
      network, *sequential, alpha, noise, options.shots, options.repetitions,
      options.seed);

  if (options.output == "json") {
    json out{{"estimates", dfsmet::vector_json(report.estimates)},
             {"covariance", dfsmet::matrix_json(report.covariance)},
             {"crb", dfsmet::matrix_json(report.crb)},
             {"shots_used", report.shots_used},
             {"repetitions", report.repetitions}};
    std::cout << out.dump(2) << '\n';
  } else if (options.output == "csv") {
    std::cout << "quantity,row,col,value\n";
    for (Eigen::Index i = 0; i < report.estimates.size(); ++i) {
      std::cout << "estimate," << i << ",," << report.estimates[i] << '\n';
    }
    print_matrix_csv(std::cout, "covariance", report.covariance);
    print_matrix_csv(std::cout, "crb", report.crb);
    std::cout << "shots_used,,," << report.shots_used << '\n';
  } else {
    std::cout << "estimates: " << report.estimates.transpose() << "\n";
    std::cout << "empirical covariance (over " << report.repetitions
              << " repetitions):\n"
              << report.covariance.format(text_format()) << "\n";
    std::cout << "CRB per repetition:\n"
              << report.crb.format(text_format()) << "\n";
    std::cout << "total shots: " << report.shots_used << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Noise-insensitive multiparameter estimation for distributed sensor "
      "networks: DFS polytopes, QFIM calculus, strategy improvement, rate "
      "optimization and a shot-level readout simulator."};
  app.require_subcommand(1);

  Options options;
  const auto add_common = [&](CLI::App* cmd, bool needs_strategy) {
    cmd->add_option("--network", options.network_path, "network JSON file")
        ->required();
    if (needs_strategy) {
      cmd->add_option("--strategy", options.strategy_path,
                      "strategy JSON file")
          ->required();
    }
    cmd->add_option("--tol", options.tol, "numerical tolerance");
    cmd->add_option("--output", options.output, "json, csv or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
  };

  CLI::App* dfs = app.add_subcommand("dfs", "kernel basis and DFS vertices");
  add_common(dfs, false);

  CLI::App* qfim = app.add_subcommand("qfim", "K matrix, QFIM and certificates");
  add_common(qfim, true);
  qfim->add_option("--noise-mode", options.noise_mode,
                   "off or infinite (dephased evaluation)");

  CLI::App* improve =
      app.add_subcommand("improve", "symmetrize, sequentialize, lift to vertices");
  add_common(improve, true);

  CLI::App* optimize =
      app.add_subcommand("optimize", "optimal vertex rates for tr(W F^-1)");
  add_common(optimize, false);
  optimize->add_option("--weights", options.weights_path,
                       "weight matrix JSON file (default identity)");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo estimation with CRB comparison");
  add_common(simulate, true);
  simulate->add_option("--alpha", options.alpha, "true field amplitudes")
      ->required();
  simulate->add_option("--shots", options.shots, "shots per direction");
  simulate->add_option("--repetitions", options.repetitions,
                       "independent repetitions for the covariance");
  simulate->add_option("--seed", options.seed, "RNG seed");
  simulate->add_option("--noise-mode", options.noise_mode,
                       "off, gaussian or infinite");
  simulate->add_option("--noise-sigma", options.noise_sigma,
                       "noise std deviation(s), one value or one per source");

  CLI11_PARSE(app, argc, argv);

  try {
    if (dfs->parsed()) return cmd_dfs(options);
    if (qfim->parsed()) return cmd_qfim(options);
    if (improve->parsed()) return cmd_improve(options);
    if (optimize->parsed()) return cmd_optimize(options);
    if (simulate->parsed()) return cmd_simulate(options);
  } catch (const dfsmet::ParseError& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 2;
  } catch (const Error& error) {
    std::cerr << "error: " << error.what() << '\n';
    return exit_code_for(error.code());
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 1;
  }
  return 0;
}

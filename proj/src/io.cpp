#include "dfsmet/io.hpp"

#include <fstream>
#include <sstream>

namespace dfsmet {

namespace {

using nlohmann::json;

Eigen::MatrixXd matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) {
    throw ParseError(std::string(what) + " must be an array of rows");
  }
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(j.size()),
                      static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw ParseError(std::string(what) + " rows must have equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw ParseError(std::string(what) + " entries must be numbers");
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          row[c].get<double>();
    }
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) {
    throw ParseError(std::string(what) + " must be an array of numbers");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(std::string(what) + " entries must be numbers");
    }
    out[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return out;
}

json load_file(const std::string& path) {
  std::ifstream stream(path);
  if (!stream) {
    throw ParseError("cannot open " + path);
  }
  json j;
  try {
    stream >> j;
  } catch (const json::exception& error) {
    throw ParseError(path + ": " + error.what());
  }
  return j;
}

}  // namespace

SensorNetwork network_from_json(const json& j) {
  if (!j.is_object() || !j.contains("signal") || !j.contains("time")) {
    throw ParseError("network needs \"signal\" and \"time\"");
  }
  Eigen::MatrixXd signal = matrix_from_json(j["signal"], "signal");
  Eigen::MatrixXd noise =
      j.contains("noise") ? matrix_from_json(j["noise"], "noise")
                          : Eigen::MatrixXd(0, signal.cols());
  if (noise.rows() == 0) noise.resize(0, signal.cols());
  if (!j["time"].is_number()) {
    throw ParseError("time must be a number");
  }
  try {
    return validate_network(signal, noise, j["time"].get<double>());
  } catch (const Error& error) {
    throw ParseError(std::string("invalid network: ") + error.what());
  }
}

StrategyVariant strategy_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.contains("terms") ||
      !j["terms"].is_array() || j["terms"].empty()) {
    throw ParseError("strategy needs \"type\" and a non-empty \"terms\" list");
  }
  const std::string type = j["type"].get<std::string>();
  try {
    if (type == "pure") {
      std::vector<PureTerm> terms;
      for (const json& term : j["terms"]) {
        if (!term.contains("k") || !term.contains("re")) {
          throw ParseError("pure terms need \"k\" and \"re\" (\"im\" optional)");
        }
        const double re = term["re"].get<double>();
        const double im = term.contains("im") ? term["im"].get<double>() : 0.0;
        terms.push_back({SpinVector(vector_from_json(term["k"], "k")),
                         std::complex<double>(re, im)});
      }
      return PureStrategy(std::move(terms));
    }
    if (type == "sequential") {
      std::vector<SequentialTerm> terms;
      for (const json& term : j["terms"]) {
        if (!term.contains("k") || !term.contains("rate")) {
          throw ParseError("sequential terms need \"k\" and \"rate\"");
        }
        terms.push_back({SpinVector(vector_from_json(term["k"], "k")),
                         term["rate"].get<double>()});
      }
      return SequentialStrategy(std::move(terms));
    }
  } catch (const Error& error) {
    throw ParseError(std::string("invalid strategy: ") + error.what());
  } catch (const json::exception& error) {
    throw ParseError(std::string("invalid strategy: ") + error.what());
  }
  throw ParseError("strategy type must be \"pure\" or \"sequential\"");
}

WeightMatrix weights_from_json(const json& j) {
  if (!j.is_object() || !j.contains("w")) {
    throw ParseError("weights need \"w\"");
  }
  try {
    return WeightMatrix(matrix_from_json(j["w"], "w"));
  } catch (const Error& error) {
    throw ParseError(std::string("invalid weights: ") + error.what());
  }
}

SensorNetwork read_network(const std::string& path) {
  return network_from_json(load_file(path));
}

StrategyVariant read_strategy(const std::string& path) {
  return strategy_from_json(load_file(path));
}

WeightMatrix read_weights(const std::string& path) {
  return weights_from_json(load_file(path));
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const SensorNetwork& network) {
  return json{{"signal", matrix_json(network.signal())},
              {"noise", matrix_json(network.noise())},
              {"time", network.time()}};
}

json to_json(const PureStrategy& strategy) {
  json terms = json::array();
  for (const auto& term : strategy.terms()) {
    terms.push_back(json{{"k", vector_json(term.k.vec())},
                         {"re", term.amplitude.real()},
                         {"im", term.amplitude.imag()}});
  }
  return json{{"type", "pure"}, {"terms", std::move(terms)}};
}

json to_json(const SequentialStrategy& strategy) {
  json terms = json::array();
  for (const auto& term : strategy.terms()) {
    terms.push_back(
        json{{"k", vector_json(term.k.vec())}, {"rate", term.rate}});
  }
  return json{{"type", "sequential"}, {"terms", std::move(terms)}};
}

json to_json(const WeightMatrix& weights) {
  return json{{"w", matrix_json(weights.mat())}};
}

json to_json(const StrategyVariant& strategy) {
  return std::visit([](const auto& s) { return to_json(s); }, strategy);
}

}  // namespace dfsmet

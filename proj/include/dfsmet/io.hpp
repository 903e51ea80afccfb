#pragma once

#include "dfsmet/improve.hpp"
#include "dfsmet/model.hpp"

#include <json.hpp>

#include <string>

namespace dfsmet {

/// Raised when an input file is missing, malformed or has the wrong schema.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File formats:
//   network.json   {"signal": [[...]], "noise": [[...]], "time": 1.0}
//   strategy.json  {"type": "pure", "terms": [{"k": [...], "re": r, "im": i}]}
//                  {"type": "sequential", "terms": [{"k": [...], "rate": r}]}
//   weights.json   {"w": [[...]]}

SensorNetwork network_from_json(const nlohmann::json& j);
StrategyVariant strategy_from_json(const nlohmann::json& j);
WeightMatrix weights_from_json(const nlohmann::json& j);

SensorNetwork read_network(const std::string& path);
StrategyVariant read_strategy(const std::string& path);
WeightMatrix read_weights(const std::string& path);

nlohmann::json to_json(const SensorNetwork& network);
nlohmann::json to_json(const PureStrategy& strategy);
nlohmann::json to_json(const SequentialStrategy& strategy);
nlohmann::json to_json(const WeightMatrix& weights);
nlohmann::json to_json(const StrategyVariant& strategy);

nlohmann::json matrix_json(const Eigen::MatrixXd& m);
nlohmann::json vector_json(const Eigen::VectorXd& v);

}  // namespace dfsmet

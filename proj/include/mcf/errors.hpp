#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mcf {

// Raised when an operation's precondition does not hold. `stage` names the
// pipeline step that refused the input; `cells` lists offending cell indices
// when the refusal is local.
class Rejection : public std::runtime_error {
 public:
  Rejection(std::string stage, const std::string& what, std::vector<int> cells = {})
      : std::runtime_error(what), stage_(std::move(stage)), cells_(std::move(cells)) {}

  const std::string& stage() const { return stage_; }
  const std::vector<int>& cells() const { return cells_; }

 private:
  std::string stage_;
  std::vector<int> cells_;
};

}  // namespace mcf

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xproab {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Unusable configuration or input data (empty corpus, single-class training
/// set, malformed file, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (dimension mismatch, index out
/// of range).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// The corpus contains no counterfactual to the query; the explanation cannot
/// proceed.
class NoCounterfactualsError : public Error {
 public:
  using Error::Error;
};

/// decode(encode(query)) did not reproduce the query tokens. Carries both
/// texts for diagnostics.
class ReconstructionFailure : public Error {
 public:
  ReconstructionFailure(std::string query, std::string reconstruction)
      : Error("generator failed to reconstruct query: \"" + query +
              "\" decoded to \"" + reconstruction + "\""),
        query_(std::move(query)),
        reconstruction_(std::move(reconstruction)) {}

  const std::string& query() const { return query_; }
  const std::string& reconstruction() const { return reconstruction_; }

 private:
  std::string query_;
  std::string reconstruction_;
};

/// Malformed message on an external JSON-lines connection.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Transport failure on an external connection. Retriable; carries the batch
/// that was in flight.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what,
                          std::vector<std::string> batch = {})
      : Error(what), batch_(std::move(batch)) {}

  const std::vector<std::string>& failed_batch() const { return batch_; }

 private:
  std::vector<std::string> batch_;
};

/// Neighborhood too small to support a surrogate fit.
class DegenerateNeighborhood : public Error {
 public:
  using Error::Error;
};

}  // namespace xproab

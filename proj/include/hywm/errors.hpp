#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hywm {

/// Base of every error raised by the library. Errors that cross a layer
/// boundary (node execution, a whole run) are re-thrown with
/// std::throw_with_nested so the original error stays inspectable.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A document does not conform to its schema. `path()` points at the
/// offending field, e.g. `pool.json:$[3].net_trace.period`.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error("SchemaError at " + path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class CycleError : public Error {
 public:
  explicit CycleError(std::vector<std::string> cycle)
      : Error("CycleError{" + join(cycle) + "}"), cycle_(std::move(cycle)) {}

  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  static std::string join(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
      if (!out.empty()) out += ",";
      out += id;
    }
    return out;
  }

  std::vector<std::string> cycle_;
};

class EmptyPool : public Error {
 public:
  EmptyPool() : Error("EmptyPool: resource pool has no members") {}
};

class EmptyQuorum : public Error {
 public:
  EmptyQuorum() : Error("EmptyQuorum: quorum has no members") {}
};

class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(const std::string& label)
      : Error("UnknownLabel: '" + label + "' is not a known soft requirement") {}
};

class NoMatchingPolicy : public Error {
 public:
  explicit NoMatchingPolicy(std::string kind)
      : Error("NoMatchingPolicy(" + kind + ")"), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class UnknownConfigKey : public Error {
 public:
  explicit UnknownConfigKey(std::string key)
      : Error("UnknownConfigKey: " + key), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class UnknownKey : public Error {
 public:
  explicit UnknownKey(std::string key) : Error("UnknownKey: " + key), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class TypeMismatch : public Error {
 public:
  TypeMismatch(const std::string& key, const std::string& detail)
      : Error("TypeMismatch for '" + key + "': " + detail) {}
};

class StuckSimulation : public Error {
 public:
  explicit StuckSimulation(std::size_t unfinished)
      : Error("StuckSimulation: event queue drained with " + std::to_string(unfinished) +
              " unfinished task(s)") {}
};

class InfeasibleMapping : public Error {
 public:
  InfeasibleMapping(const std::string& task, const std::string& transformation)
      : Error("InfeasibleMapping: transformation '" + transformation + "' of task '" + task +
              "' is available on no quorum member") {}
};

class MissingInput : public Error {
 public:
  explicit MissingInput(std::string key)
      : Error("MissingInput: " + key), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class NoBeatsDetected : public Error {
 public:
  NoBeatsDetected() : Error("NoBeatsDetected: fewer than two beats found in signal") {}
};

class EmptyParameterGrid : public Error {
 public:
  EmptyParameterGrid() : Error("EmptyParameterGrid: no VHS candidates configured") {}
};

/// Raised while executing one node; nests the underlying error.
class NodeError : public Error {
 public:
  NodeError(std::string node_id, const std::string& what)
      : Error("node '" + node_id + "': " + what), node_id_(std::move(node_id)) {}

  const std::string& node_id() const noexcept { return node_id_; }

 private:
  std::string node_id_;
};

/// Raised by a workflow run; nests the underlying error.
class RunError : public Error {
 public:
  RunError(std::string run_id, const std::string& what)
      : Error("run '" + run_id + "': " + what), run_id_(std::move(run_id)) {}

  const std::string& run_id() const noexcept { return run_id_; }

 private:
  std::string run_id_;
};

/// Flattens a chain of nested exceptions into "outer: inner: ..." form.
inline std::string describe(const std::exception& e) {
  std::string out = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    out += "\n  caused by: " + describe(inner);
  } catch (...) {
    out += "\n  caused by: unknown error";
  }
  return out;
}

}  // namespace hywm

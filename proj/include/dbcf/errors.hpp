#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dbcf {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) +
                ", got " + std::to_string(got)) {}
};

class EmptyDataset : public Error {
public:
    explicit EmptyDataset(const std::string& what) : Error(what) {}
};

class InvalidParameter : public Error {
public:
    explicit InvalidParameter(const std::string& what) : Error(what) {}
};

class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

/// Configuration-file problems (distinct from data-file parse errors so the
/// CLI can map them to different exit codes).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

class UnknownCluster : public Error {
public:
    explicit UnknownCluster(int label)
        : Error("unknown cluster label " + std::to_string(label)) {}
};

class UnknownVertex : public Error {
public:
    explicit UnknownVertex(std::size_t row)
        : Error("row " + std::to_string(row) + " is not a vertex of this graph") {}
};

class InternalInconsistency : public Error {
public:
    explicit InternalInconsistency(const std::string& what) : Error(what) {}
};

class DuplicateVertex : public Error {
public:
    explicit DuplicateVertex(std::size_t row)
        : Error("vertex " + std::to_string(row) + " appears twice in subset") {}
};

class ZeroGraphDistance : public Error {
public:
    ZeroGraphDistance(std::size_t u, std::size_t v)
        : Error("graph distance between distinct vertices " + std::to_string(u) +
                " and " + std::to_string(v) + " is zero") {}
};

/// Carries how many admissible cores were actually available.
class InsufficientCores : public Error {
public:
    InsufficientCores(std::size_t requested, std::size_t available)
        : Error("requested " + std::to_string(requested) + " cores but only " +
                std::to_string(available) + " admissible"),
          available_(available) {}
    std::size_t available() const { return available_; }

private:
    std::size_t available_;
};

class SearchSpaceTooLarge : public Error {
public:
    explicit SearchSpaceTooLarge(const std::string& what) : Error(what) {}
};

class NoAdmissibleCore : public Error {
public:
    explicit NoAdmissibleCore(const std::string& what) : Error(what) {}
};

class AlreadyInTarget : public Error {
public:
    explicit AlreadyInTarget(int label)
        : Error("point is already assigned to target cluster " + std::to_string(label)) {}
};

class InfeasiblePlacement : public Error {
public:
    explicit InfeasiblePlacement(const std::string& what) : Error(what) {}
};

class NoValidCounterfactuals : public Error {
public:
    NoValidCounterfactuals() : Error("no valid counterfactuals in set") {}
};

class MixedClusters : public Error {
public:
    MixedClusters() : Error("counterfactual set spans multiple target clusters") {}
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& what) : Error(what) {}
};

class NoClusters : public Error {
public:
    NoClusters() : Error("model has no clusters; nothing to target") {}
};

}  // namespace dbcf

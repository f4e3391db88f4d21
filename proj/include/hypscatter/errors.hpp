#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypscatter {

/// Failure categories raised by the library. The CLI maps them to exit codes.
enum class ErrorKind {
  DomainError,
  DomainViolation,
  PoleAtNonpositiveInteger,
  PoleAtOne,
  NearPole,
  PoleOnBoundary,
  PoleOfEisenstein,
  ScatteringPole,
  ZeroOfRelativeZeta,
  GroupTooCoarse,
  BallOverflow,
  NonModularGroup,
  ConvergenceDomain,
  SingularPair,
  InsufficientRadius,
  ZeroCoupling,
  SingularReparametrization,
  OutOfComputableRegion,
  IllConditionedFit,
  QuadratureFailure,
  NoContraction,
  TupleExplosion,
  RootMissed,
  RepresentationUnavailable,
  ConfigError,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::PoleAtNonpositiveInteger: return "PoleAtNonpositiveInteger";
    case ErrorKind::PoleAtOne: return "PoleAtOne";
    case ErrorKind::NearPole: return "NearPole";
    case ErrorKind::PoleOnBoundary: return "PoleOnBoundary";
    case ErrorKind::PoleOfEisenstein: return "PoleOfEisenstein";
    case ErrorKind::ScatteringPole: return "ScatteringPole";
    case ErrorKind::ZeroOfRelativeZeta: return "ZeroOfRelativeZeta";
    case ErrorKind::GroupTooCoarse: return "GroupTooCoarse";
    case ErrorKind::BallOverflow: return "BallOverflow";
    case ErrorKind::NonModularGroup: return "NonModularGroup";
    case ErrorKind::ConvergenceDomain: return "ConvergenceDomain";
    case ErrorKind::SingularPair: return "SingularPair";
    case ErrorKind::InsufficientRadius: return "InsufficientRadius";
    case ErrorKind::ZeroCoupling: return "ZeroCoupling";
    case ErrorKind::SingularReparametrization: return "SingularReparametrization";
    case ErrorKind::OutOfComputableRegion: return "OutOfComputableRegion";
    case ErrorKind::IllConditionedFit: return "IllConditionedFit";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::NoContraction: return "NoContraction";
    case ErrorKind::TupleExplosion: return "TupleExplosion";
    case ErrorKind::RootMissed: return "RootMissed";
    case ErrorKind::RepresentationUnavailable: return "RepresentationUnavailable";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hypscatter

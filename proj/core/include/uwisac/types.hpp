#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace uwisac {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

enum class FrameKind { ofdm, ps, uw1, uw2 };

inline constexpr std::array<FrameKind, 4> kAllKinds{FrameKind::ofdm, FrameKind::ps, FrameKind::uw1,
                                                   FrameKind::uw2};

std::string_view to_string(FrameKind kind);
FrameKind parse_kind(std::string_view name);

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EqualizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateEstimate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// carries the partial sum reached before the iteration cap
struct NumericError : std::runtime_error {
  NumericError(const std::string& what, double partial)
      : std::runtime_error(what), partial_value(partial) {}
  double partial_value;
};

struct SingularFisher : std::runtime_error {
  SingularFisher(const std::string& what, double cond)
      : std::runtime_error(what), condition_number(cond) {}
  double condition_number;
};

struct RcFilter {
  double alpha = 0.25;
  int half_span = 32;
};

struct FrameConfig {
  int K = 128;
  int n_cp = 32;
  int M = 64;
  int M_p = 8;
  int qam_order = 256;
  FrameKind kind = FrameKind::uw2;
  RcFilter rc{};

  void validate() const;

  int n_x() const { return M * (K + n_cp); }
  int block_len() const { return K + n_cp; }
  // fast-time length of the sample grid / delay axis of the channel estimate
  int fast_len() const;
  // slow-time length (Doppler axis)
  int slow_len() const;
  // delay bins visited by the integer grid search
  int search_len() const;
  // first pilot sub-block spacing for PS
  int pilot_spacing() const { return M / M_p; }

  FrameConfig with_kind(FrameKind k) const {
    FrameConfig c = *this;
    c.kind = k;
    return c;
  }
};

// K=128, N_cp=32, M=64, M_p=8, 256-QAM link-level setup
FrameConfig link_config(FrameKind kind = FrameKind::uw2);
// K=1024, N_cp=204, M=140, M_p=20, 256-QAM system setup
FrameConfig system_config(FrameKind kind = FrameKind::uw2);

}  // namespace uwisac

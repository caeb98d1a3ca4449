// Copyright 2026 the truce-ts authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "truce/numerics/ops.hpp"
#include "truce/util/rng.hpp"

// Series encoders of the comparison systems. Each maps a series to a
// fixed-width vector that conditions the shared caption decoder.
namespace truce::inline TRUCE_PRECISION::base {

using num::ParameterStore;
using num::Tape;
using num::Var;

enum class EncoderKind { fc, lstm, conv, fft };
std::string_view to_string(EncoderKind k);
EncoderKind parse_encoder_kind(std::string_view s);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::conv;
  int series_length = 12;  // train-time T; fc and fft accept only this width
  int out = 36;
  int fc_hidden = 14;
  int lstm_hidden = 8;     // also the width each x_t is repeated to
  int conv_channels = 8;
  int conv_kernel = 5;
  int fft_hidden = 14;
  double input_scale = 0.01;
};

class Encoder {
 public:
  Encoder(EncoderConfig cfg, std::string prefix);
  const EncoderConfig& config() const { return cfg_; }
  const std::string& prefix() const { return prefix_; }

  void init_params(ParameterStore& ps, Rng& rng) const;
  // [1 x out]. Throws ShapeError when a fixed-width encoder sees another T.
  Var encode(Tape& tape, const ParameterStore& ps, std::span<const double> series) const;
  bool fixed_width() const { return cfg_.kind == EncoderKind::fc || cfg_.kind == EncoderKind::fft; }

 private:
  std::string name(const char* what) const { return prefix_ + "." + what; }
  EncoderConfig cfg_;
  std::string prefix_;
};

// Real DFT of x for frequencies 0..floor(T/2): real parts then imaginary parts.
std::vector<double> dft_features(std::span<const double> x);

// Every other value when the series is twice the expected length.
std::vector<double> adapt_length(std::span<const double> series, int T);

}  // namespace truce::inline TRUCE_PRECISION::base

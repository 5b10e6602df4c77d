// Copyright 2026 The FlowHigh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <complex>

#include "doctest.h"
#include "flowhigh/audio.hpp"
#include "flowhigh/error.hpp"
#include "flowhigh/filter.hpp"
#include "flowhigh/resample.hpp"
#include "flowhigh/spectral.hpp"
#include "support.hpp"

using namespace flowhigh;

TEST_SUITE("wav") {
  TEST_CASE("zero PCM16 file decodes to zeros") {
    const auto bytes = fh_test::raw_wav("RIFF", 1, 1, 48000, 16, std::vector<std::uint8_t>(2 * 48000, 0));
    const AudioSignal s = decode_wav(bytes);
    CHECK(s.sample_rate == 48000);
    REQUIRE(s.size() == 48000);
    for (double v : s.samples) CHECK(v == 0.0);
  }

  TEST_CASE("PCM16 full-scale code maps to 32767/32768") {
    const auto bytes = fh_test::raw_wav("RIFF", 1, 1, 16000, 16, {0xff, 0x7f, 0x00, 0x80});
    const AudioSignal s = decode_wav(bytes);
    CHECK(s.samples[0] == 32767.0 / 32768.0);
    CHECK(s.samples[1] == -1.0);
    AudioSignal back{{32767.0 / 32768.0}, 16000};
    const auto encoded = encode_wav(back, WavDepth::kPcm16);
    CHECK(encoded[encoded.size() - 2] == 0xff);
    CHECK(encoded[encoded.size() - 1] == 0x7f);
  }

  TEST_CASE("RIFX magic is a format error") {
    const auto bytes = fh_test::raw_wav("RIFX", 1, 1, 16000, 16, {0, 0});
    CHECK_THROWS_AS(decode_wav(bytes), FormatError);
  }

  TEST_CASE("truncated header is a format error") {
    auto bytes = fh_test::raw_wav("RIFF", 1, 1, 16000, 16, {0, 0});
    bytes.resize(20);
    CHECK_THROWS_AS(decode_wav(bytes), FormatError);
  }

  TEST_CASE("8-bit PCM is unsupported") {
    const auto bytes = fh_test::raw_wav("RIFF", 1, 1, 16000, 8, {128, 128});
    CHECK_THROWS_AS(decode_wav(bytes), UnsupportedError);
  }

  TEST_CASE("float32 round trip is lossless") {
    AudioSignal s = fh_test::noise(22050, 5000, 7);
    for (auto& v : s.samples) v = static_cast<float>(std::clamp(v, -1.0, 1.0));
    const AudioSignal back = decode_wav(encode_wav(s, WavDepth::kFloat32));
    CHECK(back.sample_rate == 22050);
    CHECK(fh_test::max_abs_diff(s.samples, back.samples, 0, s.size()) == 0.0);
  }

  TEST_CASE("PCM16 and PCM24 round trips stay within one quantization step") {
    AudioSignal s = fh_test::noise(16000, 5000, 8);
    for (auto& v : s.samples) v = std::clamp(v, -1.0, 1.0);
    const AudioSignal b16 = decode_wav(encode_wav(s, WavDepth::kPcm16));
    const AudioSignal b24 = decode_wav(encode_wav(s, WavDepth::kPcm24));
    CHECK(fh_test::max_abs_diff(s.samples, b16.samples, 0, s.size()) <= std::ldexp(1.0, -15));
    CHECK(fh_test::max_abs_diff(s.samples, b24.samples, 0, s.size()) <= std::ldexp(1.0, -23));
  }

  TEST_CASE("out-of-range samples are clipped on write") {
    AudioSignal s{{1.5, -1.5, 0.25}, 16000};
    const AudioSignal back = decode_wav(encode_wav(s, WavDepth::kPcm16));
    CHECK(back.samples[0] == doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
    CHECK(back.samples[1] == -1.0);
    CHECK(back.samples[2] == 0.25);
    const AudioSignal f = decode_wav(encode_wav(s, WavDepth::kFloat32));
    CHECK(f.samples[0] == 1.0);
    CHECK(f.samples[1] == -1.0);
  }

  TEST_CASE("multichannel input keeps channel 0") {
    // Stereo PCM16: left = 1000, right = -1000.
    std::vector<std::uint8_t> data;
    for (int i = 0; i < 4; ++i) {
      for (std::int16_t v : {std::int16_t{1000}, std::int16_t{-1000}}) {
        data.push_back(static_cast<std::uint8_t>(v & 0xff));
        data.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
      }
    }
    const AudioSignal s = decode_wav(fh_test::raw_wav("RIFF", 1, 2, 8000, 16, data));
    REQUIRE(s.size() == 4);
    for (double v : s.samples) CHECK(v == 1000.0 / 32768.0);
  }

  TEST_CASE("file round trip and missing file") {
    const auto dir = fh_test::scratch_dir("wav");
    const AudioSignal s = fh_test::sine(440.0, 0.5, 16000, 1600);
    write_wav(s, dir / "a.wav", WavDepth::kPcm24);
    const AudioSignal back = read_wav(dir / "a.wav");
    CHECK(back.sample_rate == 16000);
    CHECK(fh_test::max_abs_diff(s.samples, back.samples, 0, s.size()) <= std::ldexp(1.0, -23));
    CHECK_THROWS_AS(read_wav(dir / "missing.wav"), IoError);
  }
}

namespace {

// |H|^2 of the analog Chebyshev I prototype at the warped digital frequency.
double analog_cheby_gain(const ChebyshevSpec& spec, double f, int sr) {
  const double eps2 = std::pow(10.0, spec.ripple_db / 10.0) - 1.0;
  const double x = std::tan(std::numbers::pi * f / sr) / std::tan(std::numbers::pi * spec.cutoff_hz / sr);
  const double tn = x <= 1.0 ? std::cos(spec.order * std::acos(x)) : std::cosh(spec.order * std::acosh(x));
  return std::sqrt(1.0 / (1.0 + eps2 * tn * tn));
}

}  // namespace

TEST_SUITE("filter") {
  const ChebyshevSpec kEval{8, 0.05, 8000.0};

  TEST_CASE("evaluation filter passband stays within the ripple band") {
    const auto sections = design_cheby1(kEval, 48000);
    CHECK(sections.size() == 4);
    const double floor = std::pow(10.0, -0.05 / 20.0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 512; ++i) {
      const double g = magnitude_response(sections, 8000.0 * i / 511.0, 48000);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    CHECK(lo >= floor - 1e-12);
    CHECK(lo >= 0.99426);
    CHECK(hi <= 1.0 + 1e-9);
  }

  TEST_CASE("digital response matches the warped analog prototype") {
    for (const ChebyshevSpec spec : {kEval, ChebyshevSpec{3, 0.5, 2000.0}, ChebyshevSpec{10, 1.0, 4000.0},
                                     ChebyshevSpec{2, 0.01, 5000.0}}) {
      for (int sr : {16000, 48000}) {
        if (spec.cutoff_hz >= 0.5 * sr) continue;
        const auto sections = design_cheby1(spec, sr);
        for (int i = 0; i <= 400; ++i) {
          const double f = 0.499 * sr * i / 400.0;
          const double want = analog_cheby_gain(spec, f, sr);
          CHECK(magnitude_response(sections, f, sr) == doctest::Approx(want).epsilon(1e-7).scale(0.0));
        }
      }
    }
  }

  TEST_CASE("stopband at twice the cutoff") {
    const auto sections = design_cheby1(kEval, 48000);
    const double g = magnitude_response(sections, 16000.0, 48000);
    CHECK(g <= std::pow(10.0, -40.0 / 20.0));
    CHECK(g == doctest::Approx(analog_cheby_gain(kEval, 16000.0, 48000)).epsilon(1e-7));
  }

  TEST_CASE("first order design is a single monotone section with unit DC gain") {
    const auto sections = design_cheby1({1, 0.5, 3000.0}, 16000);
    REQUIRE(sections.size() == 1);
    CHECK(magnitude_response(sections, 0.0, 16000) == doctest::Approx(1.0).epsilon(1e-12));
    double prev = 2.0;
    for (int i = 0; i <= 200; ++i) {
      const double g = magnitude_response(sections, 7999.0 * i / 200.0, 16000);
      CHECK(g <= prev + 1e-15);
      prev = g;
    }
  }

  TEST_CASE("every design in the training range is stable") {
    for (int order = 2; order <= 10; ++order) {
      for (double ripple : {0.01, 0.05, 0.3, 1.0}) {
        for (double cutoff : {2000.0, 4000.0, 7000.0}) {
          for (const auto& section : design_cheby1({order, ripple, cutoff}, 16000)) {
            for (const auto& p : section.poles()) CHECK(std::abs(p) < 1.0);
          }
        }
      }
    }
  }

  TEST_CASE("invalid designs are rejected") {
    CHECK_THROWS_AS(design_cheby1({0, 0.05, 1000.0}, 16000), DomainError);
    CHECK_THROWS_AS(design_cheby1({4, 0.0, 1000.0}, 16000), DomainError);
    CHECK_THROWS_AS(design_cheby1({4, 0.05, 8000.0}, 16000), DomainError);
  }

  TEST_CASE("zero in, zero out") {
    const AudioSignal z{std::vector<double>(4000, 0.0), 16000};
    const AudioSignal y = lowpass_filter(z, design_cheby1(kEval, 48000));
    for (double v : y.samples) CHECK(v == 0.0);
  }

  TEST_CASE("odd order passes DC") {
    const AudioSignal c{std::vector<double>(16000, 0.5), 16000};
    const AudioSignal y = lowpass_filter(c, design_cheby1({5, 0.5, 2000.0}, 16000));
    for (std::size_t i = 14400; i < 16000; ++i) CHECK(std::abs(y.samples[i] - 0.5) <= 0.006 * 0.5);
  }

  TEST_CASE("sine at twice the cutoff is attenuated by at least 40 dB") {
    const AudioSignal x = fh_test::sine(16000.0, 1.0, 48000, 48000);
    const AudioSignal y = lowpass_filter(x, design_cheby1(kEval, 48000));
    const double ratio = fh_test::rms(y.samples, 24000, 48000) / fh_test::rms(x.samples, 24000, 48000);
    CHECK(20.0 * std::log10(ratio) <= -40.0);
  }

  TEST_CASE("zero-phase filtering has no delay on a passband tone") {
    const AudioSignal x = fh_test::sine(500.0, 0.5, 16000, 16000);
    const AudioSignal y = lowpass_filter_zero_phase(x, design_cheby1({8, 0.05, 4000.0}, 16000));
    CHECK(fh_test::max_abs_diff(x.samples, y.samples, 1600, 14400) < 0.5 * 0.01);
  }
}

TEST_SUITE("resample") {
  TEST_CASE("identity ratio returns identical samples") {
    const AudioSignal x = fh_test::noise(16000, 3000, 3);
    const AudioSignal y = resample(x, 16000);
    CHECK(y.samples == x.samples);
  }

  TEST_CASE("length arithmetic") {
    CHECK(resample(fh_test::noise(16000, 16000, 1), 48000).size() == 48000);
    CHECK(resample(fh_test::noise(48000, 96000, 1), 8000).size() == 16000);
    CHECK(resample(fh_test::noise(44100, 44100, 1), 16000).size() == 16000);
  }

  TEST_CASE("band-limited round trip 48k -> 16k -> 48k") {
    const AudioSignal x = fh_test::sine(440.0, 0.8, 48000, 48000);
    const AudioSignal back = resample(resample(x, 16000), 48000);
    REQUIRE(back.size() == x.size());
    CHECK(fh_test::max_abs_diff(x.samples, back.samples, 4800, 43200) < 1e-3);
  }

  TEST_CASE("resampling is linear") {
    const AudioSignal a = fh_test::noise(16000, 5000, 11);
    const AudioSignal b = fh_test::noise(16000, 5000, 12);
    for (int target : {4000, 8000, 48000, 22050}) {
      const AudioSignal lhs = resample(fh_test::add(a, b, 0.7, -1.3), target);
      const AudioSignal rhs = fh_test::add(resample(a, target), resample(b, target), 0.7, -1.3);
      CHECK(fh_test::max_abs_diff(lhs.samples, rhs.samples, 0, lhs.size()) < 1e-9);
    }
  }

  TEST_CASE("downsampling removes content above the new Nyquist") {
    const AudioSignal x = fh_test::sine(6000.0, 1.0, 16000, 16000);
    const AudioSignal y = resample(x, 8000);
    CHECK(fh_test::rms(y.samples, 800, 7200) < 1e-3);
  }
}

TEST_SUITE("simulate_lr") {
  const ChebyshevSpec kEval{8, 0.05, 0.0};

  TEST_CASE("upsampled input has no energy above the low Nyquist") {
    const AudioSignal y = fh_test::sine(440.0, 0.5, 48000, 48000);
    const DegradedPair p = simulate_lr(y, 16000, kEval);
    const Grid mag = magnitude(stft(p.x_h, StftConfig{}));
    const int kc = cutoff_bin(8000.0, StftConfig{}, 48000);
    const double total = mag.array().square().sum();
    const double high = mag.rightCols(mag.cols() - kc - 1).array().square().sum();
    CHECK(10.0 * std::log10(high / total) < -60.0);
  }

  TEST_CASE("zero signal stays zero") {
    const AudioSignal z{std::vector<double>(9600, 0.0), 48000};
    const DegradedPair p = simulate_lr(z, 16000, kEval);
    for (double v : p.x_l.samples) CHECK(v == 0.0);
    for (double v : p.x_h.samples) CHECK(v == 0.0);
  }

  TEST_CASE("length arithmetic") {
    const DegradedPair p = simulate_lr(fh_test::noise(48000, 96000, 2), 8000, kEval);
    CHECK(p.x_l.size() == 16000);
    CHECK(p.x_l.sample_rate == 8000);
    CHECK(p.x_h.size() == 96000);
    CHECK(p.x_h.sample_rate == 48000);
  }

  TEST_CASE("low rate must be below the source rate") {
    CHECK_THROWS_AS(simulate_lr(fh_test::noise(16000, 1000, 2), 16000, kEval), DomainError);
  }

  TEST_CASE("zero-phase degradation is idempotent on band-limited input") {
    AudioSignal y = fh_test::sine(310.0, 0.3, 16000, 32000);
    y = fh_test::add(y, fh_test::sine(1130.0, 0.2, 16000, 32000, 0.4));
    y = fh_test::add(y, fh_test::sine(2900.0, 0.1, 16000, 32000, 1.1));
    const DegradedPair p = simulate_lr(y, 8000, kEval, PhaseMode::kZeroPhase);
    std::vector<double> diff(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) diff[i] = p.x_h.samples[i] - y.samples[i];
    CHECK(fh_test::rms(diff, 3200, 28800) < 0.01 * fh_test::rms(y.samples, 3200, 28800));
  }
}

// ref/ser_ref.cpp

// Copyright 2026  SER Engine Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ser_ref.hpp"

#include <algorithm>
#include <cmath>

namespace ser::ref {

std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * M_PI * static_cast<double>(k) *
                         static_cast<double>(t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

double zcr(const std::vector<double>& frame) {
  size_t count = 0;
  for (size_t t = 1; t < frame.size(); ++t) {
    const double prod = frame[t] * frame[t - 1];
    if (prod < 0.0) count = count + 1;
  }
  return static_cast<double>(count) / static_cast<double>(frame.size());
}

double rmse(const std::vector<double>& frame) {
  double acc = 0.0;
  for (size_t t = 0; t < frame.size(); ++t) acc += frame[t] * frame[t];
  return std::sqrt(acc / static_cast<double>(frame.size()));
}

namespace {
double mel_of(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double hz_of(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }
}  // namespace

std::vector<std::vector<double>> mel_filterbank(size_t n_mels, size_t n_fft,
                                                double fmin, double fmax,
                                                int sample_rate) {
  const size_t n_bins = n_fft / 2 + 1;
  std::vector<std::vector<double>> fb(n_mels, std::vector<double>(n_bins, 0.0));
  for (size_t m = 0; m < n_mels; ++m) {
    const double lo = mel_of(fmin);
    const double hi = mel_of(fmax);
    const double left = hz_of(lo + (hi - lo) * (m + 0.0) / (n_mels + 1.0));
    const double center = hz_of(lo + (hi - lo) * (m + 1.0) / (n_mels + 1.0));
    const double right = hz_of(lo + (hi - lo) * (m + 2.0) / (n_mels + 1.0));
    for (size_t k = 0; k < n_bins; ++k) {
      const double f =
          static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      if (f > left && f < center) {
        fb[m][k] = (f - left) / (center - left);
      } else if (f >= center && f < right) {
        fb[m][k] = (right - f) / (right - center);
      }
    }
  }
  return fb;
}

std::vector<double> mfcc_frame(const std::vector<double>& frame,
                               const std::vector<double>& window,
                               size_t n_mels, size_t n_mfcc, double fmin,
                               double fmax, int sample_rate,
                               double log_floor) {
  std::vector<double> windowed(frame.size());
  for (size_t i = 0; i < frame.size(); ++i) {
    windowed[i] = frame[i] * (window.empty() ? 1.0 : window[i]);
  }
  const auto spectrum = dft(windowed);
  const size_t n_bins = frame.size() / 2 + 1;
  std::vector<double> power(n_bins);
  for (size_t k = 0; k < n_bins; ++k) {
    power[k] = spectrum[k].real() * spectrum[k].real() +
               spectrum[k].imag() * spectrum[k].imag();
  }

  const auto fb = mel_filterbank(n_mels, frame.size(), fmin, fmax, sample_rate);
  std::vector<double> logmel(n_mels);
  for (size_t m = 0; m < n_mels; ++m) {
    double e = 0.0;
    for (size_t k = 0; k < n_bins; ++k) e += fb[m][k] * power[k];
    logmel[m] = std::log(e + log_floor);
  }

  std::vector<double> out(n_mfcc);
  for (size_t k = 0; k < n_mfcc; ++k) {
    double acc = 0.0;
    for (size_t n = 0; n < n_mels; ++n) {
      acc += logmel[n] * std::cos(M_PI * static_cast<double>(k) *
                                  (static_cast<double>(n) + 0.5) /
                                  static_cast<double>(n_mels));
    }
    const double scale = k == 0 ? std::sqrt(1.0 / static_cast<double>(n_mels))
                                : std::sqrt(2.0 / static_cast<double>(n_mels));
    out[k] = scale * acc;
  }
  return out;
}

std::vector<double> conv1d(const std::vector<double>& x, size_t batch,
                           size_t len, size_t cin,
                           const std::vector<double>& w, size_t k, size_t cout,
                           const std::vector<double>& bias) {
  std::vector<double> y(batch * len * cout, 0.0);
  const long pad = static_cast<long>(k / 2);
  for (size_t b = 0; b < batch; ++b) {
    for (size_t i = 0; i < len; ++i) {
      for (size_t f = 0; f < cout; ++f) {
        double acc = bias[f];
        for (size_t kk = 0; kk < k; ++kk) {
          const long j = static_cast<long>(i) + static_cast<long>(kk) - pad;
          if (j < 0 || j >= static_cast<long>(len)) continue;
          for (size_t c = 0; c < cin; ++c) {
            acc += w[(kk * cin + c) * cout + f] *
                   x[(b * len + static_cast<size_t>(j)) * cin + c];
          }
        }
        y[(b * len + i) * cout + f] = acc;
      }
    }
  }
  return y;
}

std::vector<double> maxpool1d(const std::vector<double>& x, size_t batch,
                              size_t len, size_t ch, size_t pool) {
  const size_t out_len = len / pool;
  std::vector<double> y(batch * out_len * ch);
  for (size_t b = 0; b < batch; ++b) {
    for (size_t i = 0; i < out_len; ++i) {
      for (size_t c = 0; c < ch; ++c) {
        double best = x[(b * len + i * pool) * ch + c];
        for (size_t p = 1; p < pool; ++p) {
          best = std::max(best, x[(b * len + i * pool + p) * ch + c]);
        }
        y[(b * out_len + i) * ch + c] = best;
      }
    }
  }
  return y;
}

std::vector<double> batchnorm1d(const std::vector<double>& x, size_t batch,
                                size_t len, size_t ch,
                                const std::vector<double>& gamma,
                                const std::vector<double>& beta, double eps) {
  std::vector<double> y(x.size());
  const double n = static_cast<double>(batch * len);
  for (size_t c = 0; c < ch; ++c) {
    double mean = 0.0;
    for (size_t b = 0; b < batch; ++b) {
      for (size_t i = 0; i < len; ++i) mean += x[(b * len + i) * ch + c];
    }
    mean /= n;
    double var = 0.0;
    for (size_t b = 0; b < batch; ++b) {
      for (size_t i = 0; i < len; ++i) {
        const double d = x[(b * len + i) * ch + c] - mean;
        var += d * d;
      }
    }
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (size_t b = 0; b < batch; ++b) {
      for (size_t i = 0; i < len; ++i) {
        const size_t idx = (b * len + i) * ch + c;
        y[idx] = gamma[c] * (x[idx] - mean) * inv + beta[c];
      }
    }
  }
  return y;
}

std::vector<double> softmax(const std::vector<double>& x, size_t rows,
                            size_t cols) {
  std::vector<double> y(x.size());
  for (size_t r = 0; r < rows; ++r) {
    double mx = x[r * cols];
    for (size_t c = 1; c < cols; ++c) mx = std::max(mx, x[r * cols + c]);
    double sum = 0.0;
    for (size_t c = 0; c < cols; ++c) {
      y[r * cols + c] = std::exp(x[r * cols + c] - mx);
      sum += y[r * cols + c];
    }
    for (size_t c = 0; c < cols; ++c) y[r * cols + c] /= sum;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

namespace {

// All n-grams of `tokens` as joined strings, kept in a plain vector.
std::vector<std::string> ngrams_of(const std::vector<std::string>& tokens,
                                   size_t n) {
  std::vector<std::string> out;
  if (tokens.size() < n) return out;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (size_t j = 1; j < n; ++j) {
      g += '\x1f';
      g += tokens[i + j];
    }
    out.push_back(std::move(g));
  }
  return out;
}

uint64_t count_of(const std::vector<std::string>& grams,
                  const std::string& g) {
  uint64_t c = 0;
  for (const auto& h : grams) {
    if (h == g) ++c;
  }
  return c;
}

}  // namespace

double bleu(const std::vector<std::vector<std::string>>& hyps,
            const std::vector<std::vector<std::string>>& refs) {
  uint64_t hyp_len = 0, ref_len = 0;
  uint64_t matches[4] = {0, 0, 0, 0};
  uint64_t totals[4] = {0, 0, 0, 0};

  for (size_t s = 0; s < hyps.size(); ++s) {
    hyp_len += hyps[s].size();
    ref_len += refs[s].size();
    for (size_t n = 1; n <= 4; ++n) {
      const auto hg = ngrams_of(hyps[s], n);
      const auto rg = ngrams_of(refs[s], n);
      totals[n - 1] += hg.size();
      // Clipped matches: count each distinct hypothesis n-gram at most
      // min(hyp count, ref count) times.
      std::vector<std::string> seen;
      for (const auto& g : hg) {
        bool done = false;
        for (const auto& sgram : seen) {
          if (sgram == g) {
            done = true;
            break;
          }
        }
        if (done) continue;
        seen.push_back(g);
        matches[n - 1] += std::min(count_of(hg, g), count_of(rg, g));
      }
    }
  }

  if (hyp_len == 0) return 0.0;

  double log_sum = 0.0;
  size_t levels = 0;
  for (size_t n = 0; n < 4; ++n) {
    if (totals[n] == 0) continue;
    double p;
    if (matches[n] == 0) {
      p = 1.0 / (2.0 * static_cast<double>(totals[n]));
    } else {
      p = static_cast<double>(matches[n]) / static_cast<double>(totals[n]);
    }
    log_sum += std::log(p);
    ++levels;
  }
  if (levels == 0) return 0.0;

  double bp = 1.0;
  if (hyp_len < ref_len) {
    bp = std::exp(1.0 - static_cast<double>(ref_len) /
                            static_cast<double>(hyp_len));
  }
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(levels));
}

std::vector<std::pair<std::string, uint64_t>> word_counts(
    const std::vector<std::vector<std::string>>& sentences) {
  // Pass 1: collect distinct words in first-seen order.
  std::vector<std::string> words;
  for (const auto& s : sentences) {
    for (const auto& w : s) {
      bool known = false;
      for (const auto& k : words) {
        if (k == w) {
          known = true;
          break;
        }
      }
      if (!known) words.push_back(w);
    }
  }
  // Pass 2: count each word with a fresh scan.
  std::vector<std::pair<std::string, uint64_t>> out;
  for (const auto& w : words) {
    uint64_t c = 0;
    for (const auto& s : sentences) {
      for (const auto& t : s) {
        if (t == w) ++c;
      }
    }
    out.emplace_back(w, c);
  }
  return out;
}

std::vector<Prf> prf(const std::vector<uint16_t>& truth,
                     const std::vector<uint16_t>& pred, size_t n_classes) {
  std::vector<Prf> out(n_classes);
  for (size_t c = 0; c < n_classes; ++c) {
    uint64_t tp = 0, fp = 0, fn = 0, support = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == c) ++support;
      if (truth[i] == c && pred[i] == c) ++tp;
      if (truth[i] != c && pred[i] == c) ++fp;
      if (truth[i] == c && pred[i] != c) ++fn;
    }
    const double p =
        tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double r =
        tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    const double f1 = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
    out[c] = {p, r, f1, support};
  }
  return out;
}

}  // namespace ser::ref

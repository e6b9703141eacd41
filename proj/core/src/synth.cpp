// Copyright 2026 The mdetect Authors
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

#include "mdetect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mdetect/errors.hpp"

namespace mdetect {

void SynthConfig::validate() const {
  if (n_binaries < 1) throw ConfigError("n_binaries must be positive");
  if (n_weeks < 1) throw ConfigError("n_weeks must be positive");
  if (!(malicious_fraction >= 0 && malicious_fraction <= 1))
    throw ConfigError("malicious_fraction must be in [0, 1]");
  if (n_families < 1) throw ConfigError("n_families must be positive");
  if (!(drift_rate >= 0 && drift_rate <= 1)) throw ConfigError("drift_rate must be in [0, 1]");
  if (vendor_lag_weeks < 0) throw ConfigError("vendor_lag_weeks must be non-negative");
  if (n_vendors < 1) throw ConfigError("n_vendors must be positive");
}

namespace {

// Portable draws on top of mt19937_64; the standard distributions are not
// specified bit-for-bit across library implementations.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do r = rng_(); while (r >= limit);
    return r % n;
  }

  int between(int lo, int hi) { return lo + static_cast<int>(below(hi - lo + 1)); }
  double between(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t raw() { return rng_(); }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

 private:
  std::mt19937_64 rng_;
};

const std::vector<std::string>& api_vocabulary() {
  static const std::vector<std::string> vocab = [] {
    const char* verbs[] = {"Create", "Open",  "Read",   "Write", "Query", "Set",  "Get",
                           "Enum",   "Load",  "Map",    "Close", "Find",  "Alloc", "Free",
                           "Inject", "Crypt", "Resume", "Send",  "Recv",  "Hook"};
    const char* nouns[] = {"File",    "Key",     "Process", "Thread",  "Memory",
                           "Library", "Window",  "Service", "Socket",  "Url",
                           "Token",   "Section", "Mutex",   "Event",   "Pipe",
                           "Module",  "Handle",  "Value",   "Object",  "Resource"};
    std::vector<std::string> out;
    for (const char* v : verbs)
      for (const char* n : nouns) out.push_back(std::string(v) + n);
    return out;
  }();
  return vocab;
}

const std::vector<std::string>& dll_names() {
  static const std::vector<std::string> dlls = {
      "kernel32", "user32", "advapi32", "ws2_32", "wininet", "shell32",
      "ole32",    "crypt32", "ntdll",   "msvcrt", "gdi32",   "comctl32"};
  return dlls;
}

const std::vector<std::string>& packers() {
  static const std::vector<std::string> p = {"UPX",     "ASPack",    "Themida", "MPRESS",
                                             "PECompact", "VMProtect", "Armadillo", "FSG",
                                             "NSIS",    "InnoSetup"};
  return p;
}

std::string make_word(Draw& draw, int syllables) {
  static const std::vector<std::string> parts = {
      "ka", "lo", "mi", "tor", "ven", "rix", "sol", "dan", "qu", "el", "ma", "tek",
      "ron", "zen", "fi", "pa", "nor", "gal", "sys", "soft", "net", "ware", "lab", "cor"};
  std::string w;
  for (int i = 0; i < syllables; ++i) w += draw.pick(parts);
  return w;
}

std::string random_token(Draw& draw, int length) {
  static const std::string alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  std::string s;
  for (int i = 0; i < length; ++i) s += alphabet[draw.below(alphabet.size())];
  return s;
}

// Sampling pool for a template's API tokens. Benign software leans on the
// first part of the vocabulary, malware on the second, with overlap.
int draw_api(Draw& draw, bool malicious) {
  const int n = static_cast<int>(api_vocabulary().size());
  const int split = n * 5 / 8;
  bool suspicious = malicious ? draw.bernoulli(0.5) : draw.bernoulli(0.1);
  return suspicious ? draw.between(split, n - 1) : draw.between(0, split - 1);
}

std::string draw_import(Draw& draw, bool malicious) {
  return draw.pick(dll_names()) + "." + api_vocabulary()[draw_api(draw, malicious)];
}

struct Signature {
  std::vector<int> api;
  std::vector<std::string> imports;
  std::optional<std::string> signer;
  std::optional<std::string> packer;
  std::optional<std::string> domain;
  std::string resource;
  std::string comment;
  double size_scale = 1e5;
  double files_scale = 5;
  double registry_scale = 5;
};

Signature benign_signature(Draw& draw, const std::vector<std::string>& signers) {
  Signature s;
  for (int i = 0; i < 14; ++i) s.api.push_back(draw_api(draw, false));
  for (int i = 0; i < 10; ++i) s.imports.push_back(draw_import(draw, false));
  if (draw.bernoulli(0.8)) s.signer = draw.pick(signers);
  double r = draw.uniform();
  if (r < 0.25) s.packer = draw.bernoulli(0.5) ? "NSIS" : "InnoSetup";
  else if (r < 0.3) s.packer = "UPX";
  if (draw.bernoulli(0.5))
    s.domain = draw.bernoulli(0.5) ? "update." + make_word(draw, 2) + ".com" : "cdn.example.net";
  s.resource = make_word(draw, 2) + "_" + (draw.bernoulli(0.5) ? "icon" : "setup");
  s.comment = make_word(draw, 3) + " " + make_word(draw, 2) + " utility";
  s.size_scale = std::exp2(draw.between(16.0, 24.0));
  s.files_scale = draw.between(0.0, 25.0);
  s.registry_scale = draw.between(0.0, 20.0);
  return s;
}

Signature malicious_signature(Draw& draw) {
  Signature s;
  for (int i = 0; i < 14; ++i) s.api.push_back(draw_api(draw, true));
  for (int i = 0; i < 10; ++i) s.imports.push_back(draw_import(draw, true));
  if (draw.bernoulli(0.2)) s.signer = make_word(draw, 2) + " Ltd";
  if (draw.bernoulli(0.7)) s.packer = draw.pick(packers());
  if (draw.bernoulli(0.8)) s.domain = make_word(draw, 3) + (draw.bernoulli(0.5) ? ".biz" : ".info");
  s.resource = random_token(draw, 12);
  s.comment = draw.bernoulli(0.5) ? make_word(draw, 2) + " " + random_token(draw, 6) : "";
  s.size_scale = std::exp2(draw.between(14.0, 20.0));
  s.files_scale = draw.between(5.0, 300.0);
  s.registry_scale = draw.between(3.0, 150.0);
  return s;
}

// One week of drift: a share of the signature is regenerated.
void mutate(Signature& s, Draw& draw, bool malicious) {
  for (auto& a : s.api)
    if (draw.bernoulli(0.35)) a = draw_api(draw, malicious);
  for (auto& imp : s.imports)
    if (draw.bernoulli(0.35)) imp = draw_import(draw, malicious);
  if (malicious) {
    s.resource = random_token(draw, 12);
    if (draw.bernoulli(0.3)) s.packer = draw.bernoulli(0.3) ? std::nullopt
                                                            : std::optional(draw.pick(packers()));
    if (draw.bernoulli(0.5))
      s.domain = make_word(draw, 3) + (draw.bernoulli(0.5) ? ".biz" : ".info");
    if (draw.bernoulli(0.3)) s.comment = make_word(draw, 2) + " " + random_token(draw, 6);
  } else {
    s.resource = make_word(draw, 2) + "_" + (draw.bernoulli(0.5) ? "icon" : "setup");
  }
  s.files_scale *= draw.between(0.7, 1.4);
  s.registry_scale *= draw.between(0.7, 1.4);
}

// Signature of each lineage, one entry per week starting at its birth week.
// variant_start holds the time (seconds from the corpus start) at which the
// current signature first appeared; lineages alive at week 0 predate the corpus.
struct Lineage {
  int birth_week = 0;
  bool malicious = false;
  std::vector<Signature> weekly;
  std::vector<double> variant_start;
};

Lineage make_lineage(Draw& draw, bool malicious, int birth, int n_weeks, double drift,
                     const std::vector<std::string>& signers) {
  Lineage l;
  l.birth_week = birth;
  l.malicious = malicious;
  l.weekly.push_back(malicious ? malicious_signature(draw) : benign_signature(draw, signers));
  l.variant_start.push_back(birth == 0 ? -draw.uniform() * 8 * kSecondsPerWeek
                                       : static_cast<double>(birth) * kSecondsPerWeek);
  for (int w = birth + 1; w < n_weeks; ++w) {
    Signature next = l.weekly.back();
    double start = l.variant_start.back();
    if (draw.bernoulli(drift)) {
      mutate(next, draw, malicious);
      start = static_cast<double>(w) * kSecondsPerWeek;
    }
    l.weekly.push_back(std::move(next));
    l.variant_start.push_back(start);
  }
  return l;
}

std::uint64_t jitter(Draw& draw, double scale) {
  return static_cast<std::uint64_t>(std::llround(std::max(0.0, scale * draw.between(0.5, 1.6))));
}

std::map<std::string, AttributeValue> sample_attributes(Draw& draw, const Signature& sig,
                                                        bool malicious,
                                                        const Signature* host) {
  std::map<std::string, AttributeValue> attrs;
  Sequence api;
  const auto& vocab = api_vocabulary();
  // Trojanized samples ride on a benign host and carry part of the family.
  const Signature& base = host ? *host : sig;
  for (int a : base.api) {
    if (draw.bernoulli(0.15)) continue;
    api.tokens.push_back(vocab[a]);
    if (draw.bernoulli(0.1)) api.tokens.push_back(vocab[draw_api(draw, malicious)]);
  }
  if (host)
    for (int i = 0; i < 4; ++i) {
      auto pos = api.tokens.begin() + static_cast<long>(draw.below(api.tokens.size() + 1));
      api.tokens.insert(pos, vocab[sig.api[draw.below(sig.api.size())]]);
    }
  attrs.emplace("api_calls", std::move(api));

  Sequence imports;
  for (const auto& imp : base.imports)
    if (!draw.bernoulli(0.1)) imports.tokens.push_back(imp);
  if (host) imports.tokens.push_back(sig.imports[draw.below(sig.imports.size())]);
  if (draw.bernoulli(0.3)) imports.tokens.push_back(draw_import(draw, malicious));
  attrs.emplace("imports", std::move(imports));

  attrs.emplace("signer", Categorical{base.signer});
  attrs.emplace("packer", Categorical{host ? sig.packer : base.packer});
  const auto& domain = host ? sig.domain : base.domain;
  if (domain) attrs.emplace("network_domain", Categorical{domain});

  std::string resource = base.resource;
  for (int i = 0; i < 2 && !resource.empty(); ++i)
    if (draw.bernoulli(0.5)) resource[draw.below(resource.size())] = random_token(draw, 1)[0];
  attrs.emplace("resource_name", Text{resource});
  if (!base.comment.empty()) attrs.emplace("version_comment", Text{base.comment});

  attrs.emplace("file_size", Ordinal{jitter(draw, base.size_scale)});
  attrs.emplace("files_written", Ordinal{jitter(draw, host ? sig.files_scale : base.files_scale)});
  attrs.emplace("registry_writes", Ordinal{jitter(draw, base.registry_scale)});
  return attrs;
}

std::string hex_id(Draw& draw) {
  static const char digits[] = "0123456789abcdef";
  std::string s;
  for (int part = 0; part < 2; ++part) {
    std::uint64_t v = draw.raw();
    for (int i = 0; i < 16; ++i) s += digits[(v >> (4 * i)) & 0xf];
  }
  return s;
}

}  // namespace

Corpus synth_corpus(const SynthConfig& config) {
  config.validate();
  Draw draw(config.seed);

  const Timestamp span = static_cast<Timestamp>(config.n_weeks) * kSecondsPerWeek;
  const int n_benign_lineages = std::max(40, 2 * config.n_families);

  Corpus corpus;
  corpus.header.groups = {
      {"api_calls", AttributeKind::sequence},     {"file_size", AttributeKind::ordinal},
      {"files_written", AttributeKind::ordinal},  {"imports", AttributeKind::sequence},
      {"network_domain", AttributeKind::categorical}, {"packer", AttributeKind::categorical},
      {"registry_writes", AttributeKind::ordinal}, {"resource_name", AttributeKind::text},
      {"signer", AttributeKind::categorical},     {"version_comment", AttributeKind::text}};
  for (int v = 0; v < config.n_vendors; ++v) {
    std::string name = "vendor_" + std::string(v < 10 ? "0" : "") + std::to_string(v);
    corpus.header.vendors.push_back(std::move(name));
  }

  std::vector<std::string> signers;
  for (int i = 0; i < 30; ++i) signers.push_back(make_word(draw, 2) + " Software");

  std::vector<Lineage> families, apps;
  for (int f = 0; f < config.n_families; ++f) {
    int birth = draw.bernoulli(0.3) || f == 0 ? 0 : draw.between(0, config.n_weeks - 1);
    families.push_back(
        make_lineage(draw, true, birth, config.n_weeks, config.drift_rate, signers));
  }
  for (int a = 0; a < n_benign_lineages; ++a) {
    int birth = draw.bernoulli(0.7) || a == 0 ? 0 : draw.between(0, config.n_weeks - 1);
    apps.push_back(
        make_lineage(draw, false, birth, config.n_weeks, config.drift_rate / 4, signers));
  }

  auto alive = [](const std::vector<Lineage>& pool, int week) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i].birth_week <= week) out.push_back(i);
    return out;
  };

  const int n = config.n_vendors;
  const double lag_mean = static_cast<double>(config.vendor_lag_weeks) * kSecondsPerWeek;

  for (int b = 0; b < config.n_binaries; ++b) {
    BinaryHistory history;
    history.binary_id = hex_id(draw);
    const bool malicious = draw.bernoulli(config.malicious_fraction);
    const Timestamp arrival = static_cast<Timestamp>(draw.below(span));
    const int week = static_cast<int>(arrival / kSecondsPerWeek);

    const auto app_pool = alive(apps, week);
    const Lineage& app = apps[draw.pick(app_pool)];
    const Signature& app_sig = app.weekly[week - app.birth_week];
    std::map<std::string, AttributeValue> attrs;
    double variant_start = 0;
    if (malicious) {
      const auto fam_pool = alive(families, week);
      const Lineage& fam = families[draw.pick(fam_pool)];
      const Signature& sig = fam.weekly[week - fam.birth_week];
      variant_start = fam.variant_start[week - fam.birth_week];
      attrs = sample_attributes(draw, sig, true, draw.bernoulli(0.15) ? &app_sig : nullptr);
    } else {
      attrs = sample_attributes(draw, app_sig, false, nullptr);
    }

    // Vendor detection time per vendor; max() means never.
    constexpr Timestamp kNever = std::numeric_limits<Timestamp>::max();
    std::vector<Timestamp> detect_at(n, kNever);
    Timestamp mature = arrival;
    if (malicious) {
      // Vendors catch up with a variant roughly lag_mean after it first appears.
      const double latest = static_cast<double>(span - 1);
      const int k = draw.between(std::max(1, n / 4), n);
      std::vector<int> order(n);
      for (int v = 0; v < n; ++v) order[v] = v;
      for (int i = n - 1; i > 0; --i) std::swap(order[i], order[draw.below(i + 1)]);
      bool lagged = false;
      for (int i = 0; i < k; ++i) {
        double when = variant_start + lag_mean * draw.between(0.5, 1.5);
        when = std::clamp(when, static_cast<double>(arrival), latest);
        Timestamp t = static_cast<Timestamp>(when);
        lagged = lagged || t > arrival;
        detect_at[order[i]] = t;
        mature = std::max(mature, t);
      }
      if (lagged) {
        double r = draw.uniform();
        int early = r < 0.5 ? 0 : (r < 0.8 ? 1 : 2);
        for (int i = 0; i < early; ++i) detect_at[draw.below(n)] = arrival;
      }
    } else if (draw.bernoulli(0.04)) {
      detect_at[draw.below(n)] = arrival;
    }

    std::vector<Timestamp> times{arrival};
    while (times.size() < 6 && draw.bernoulli(0.45))
      times.push_back(arrival + static_cast<Timestamp>(draw.below(span - arrival)));
    std::sort(times.begin(), times.end());
    if (times.back() < mature)
      times.push_back(mature + static_cast<Timestamp>(draw.below(span - mature)));

    for (Timestamp t : times) {
      ScanEvent e;
      e.binary_id = history.binary_id;
      e.time = kSynthEpoch + t;
      for (int v = 0; v < n; ++v) e.vendor_verdicts.emplace(corpus.header.vendors[v], detect_at[v] <= t);
      e.attributes = attrs;
      history.events.push_back(std::move(e));
    }
    corpus.histories.push_back(std::move(history));
  }

  std::stable_sort(corpus.histories.begin(), corpus.histories.end(),
                   [](const BinaryHistory& a, const BinaryHistory& b) {
                     if (a.first().time != b.first().time) return a.first().time < b.first().time;
                     return a.binary_id < b.binary_id;
                   });
  return corpus;
}

}  // namespace mdetect

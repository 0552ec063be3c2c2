// SPDX-License-Identifier: Apache-2.0
#include "corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace adlm::testing {

namespace {

using Words = std::vector<std::string_view>;

const Words kDets = {"the", "a", "this", "that", "every", "one", "my", "our", "their", "his", "her", "some"};
const Words kAdjs = {"old",    "young",   "quiet",  "small",   "bright", "tired",  "curious", "gentle", "dark",
                     "silver", "ancient", "hungry", "clever",  "lonely", "broken", "golden",  "cold",   "warm",
                     "strange", "busy",   "proud",  "distant", "narrow", "heavy",  "patient", "rusty",  "pale",
                     "noisy",  "humble",  "wild",   "careful", "sleepy", "brave",  "sudden",  "empty",  "green"};
const Words kNouns = {"man",     "woman",   "child",   "dog",      "cat",      "farmer",   "teacher", "sailor",
                      "king",    "girl",    "boy",     "doctor",   "soldier",  "painter",  "baker",   "stranger",
                      "horse",   "bird",    "fox",     "merchant", "priest",   "student",  "captain", "widow",
                      "miller",  "hunter",  "poet",    "queen",    "thief",    "fisherman", "clerk",  "nurse",
                      "wolf",    "traveler", "singer", "guard",    "weaver",   "monk",     "cook",    "judge"};
const Words kThings = {"letter", "book",   "bread",   "lamp",   "key",    "coat",    "song",   "story",
                       "boat",   "cup",    "map",     "ring",   "basket", "candle",  "knife",  "horse",
                       "door",   "window", "garden",  "apple",  "stone",  "feather", "box",    "coin",
                       "rope",   "hat",    "wagon",   "bottle", "mirror", "blanket", "ladder", "bell"};
const Words kPlaces = {"river",  "market", "village", "forest", "harbor", "church", "castle", "bridge", "hill",
                       "field",  "city",   "road",    "house",  "kitchen", "station", "school", "shore",  "valley",
                       "tavern", "square", "mill",    "tower",  "meadow", "cellar", "well",   "orchard"};
const Words kNames = {"anna",  "peter", "maria", "john",  "clara", "henry", "lucy",   "thomas",
                      "emma",  "oscar", "rosa",  "victor", "ida",  "samuel", "helen", "arthur"};
const Words kPronouns = {"he", "she", "they", "we", "i", "you"};
const Words kIntrans = {"walked",  "slept",   "waited", "laughed", "smiled", "ran",     "sang",    "wept",
                        "arrived", "left",    "stayed", "rested",  "danced", "worked",  "prayed",  "listened",
                        "returned", "paused", "hurried", "wandered", "shouted", "trembled", "nodded", "sighed"};
const Words kTrans = {"found",   "carried", "opened", "saw",     "held",   "bought",  "lost",    "sold",
                      "painted", "read",    "mended", "watched", "took",   "brought", "kept",    "dropped",
                      "cleaned", "hid",     "built",  "wanted",  "needed", "gave",    "touched", "remembered"};
const Words kBase = {"find", "carry", "open", "see", "hold", "buy", "lose", "sell", "paint",
                     "read", "mend",  "watch", "take", "bring", "keep", "clean", "hide", "want"};
const Words kPreps = {"near", "by", "in", "at", "behind", "across", "toward", "beside", "under", "past", "along", "into"};
const Words kAdverbs = {"slowly",  "quickly", "quietly", "again",   "alone",  "together", "carefully", "softly",
                        "suddenly", "early",  "late",    "happily", "sadly", "gladly",   "often",     "rarely"};
const Words kTimes = {"that morning", "in the evening", "at night",    "the next day", "after supper",
                      "before dawn",  "in the spring",  "every sunday", "last winter",  "at noon"};
const Words kVerbsSay = {"said", "knew", "thought", "believed", "heard", "felt", "hoped", "feared"};

class Gen {
 public:
  Gen(std::uint64_t seed, double richness) : rng_(seed), richness_(std::clamp(richness, 0.05, 1.0)) {}

  std::string_view pick(const Words& w, double s = 1.0) {
    const std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(w.size() * richness_)));
    const std::size_t limit = std::min(n, w.size());
    double total = 0.0;
    for (std::size_t r = 0; r < limit; ++r) total += 1.0 / std::pow(static_cast<double>(r + 1), s);
    double u = unit() * total;
    for (std::size_t r = 0; r < limit; ++r) {
      u -= 1.0 / std::pow(static_cast<double>(r + 1), s);
      if (u <= 0.0) return w[r];
    }
    return w[limit - 1];
  }

  bool chance(double p) { return unit() < p; }

  void np(std::string& out, const Words& nouns) {
    const double r = unit();
    if (r < 0.12 && &nouns == &kNouns) {
      add(out, pick(kNames));
    } else if (r < 0.2 && &nouns == &kNouns) {
      add(out, pick(kPronouns, 0.7));
    } else {
      add(out, pick(kDets, 1.1));
      if (chance(0.45)) add(out, pick(kAdjs));
      add(out, pick(nouns));
    }
  }

  void pp(std::string& out) {
    add(out, pick(kPreps));
    add(out, "the");
    if (chance(0.25)) add(out, pick(kAdjs));
    add(out, pick(kPlaces));
  }

  std::string sentence() {
    std::string out;
    const double r = unit();
    if (r < 0.28) {
      np(out, kNouns);
      add(out, pick(kIntrans));
      if (chance(0.3)) add(out, pick(kAdverbs));
      if (chance(0.7)) pp(out);
      end(out, ".");
    } else if (r < 0.56) {
      np(out, kNouns);
      add(out, pick(kTrans));
      np(out, kThings);
      if (chance(0.5)) pp(out);
      end(out, ".");
    } else if (r < 0.68) {
      add(out, pick(kTimes, 0.8));
      add(out, ",");
      np(out, kNouns);
      add(out, pick(kTrans));
      np(out, kThings);
      end(out, ".");
    } else if (r < 0.78) {
      np(out, kNouns);
      add(out, pick(kVerbsSay));
      add(out, "that");
      np(out, kNouns);
      add(out, pick(kIntrans));
      if (chance(0.5)) pp(out);
      end(out, ".");
    } else if (r < 0.88) {
      add(out, "did");
      np(out, kNouns);
      add(out, pick(kBase));
      np(out, kThings);
      end(out, "?");
    } else {
      np(out, kNouns);
      add(out, pick(kIntrans));
      add(out, chance(0.7) ? "and" : "but");
      np(out, kNouns);
      add(out, pick(kIntrans));
      if (chance(0.3)) pp(out);
      end(out, chance(0.9) ? "." : "!");
    }
    return out;
  }

 private:
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  static void add(std::string& out, std::string_view w) {
    if (!out.empty()) out.push_back(' ');
    out.append(w);
  }
  static void end(std::string& out, std::string_view p) { add(out, p); }

  std::mt19937_64 rng_;
  double richness_;
};

}  // namespace

std::string synthetic_corpus(std::size_t sentences, std::uint64_t seed, double richness) {
  Gen g(seed, richness);
  std::string out;
  for (std::size_t i = 0; i < sentences; ++i) {
    out += g.sentence();
    out.push_back('\n');
  }
  return out;
}

}  // namespace adlm::testing

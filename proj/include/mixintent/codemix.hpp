#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "mixintent/dataset.hpp"

namespace mixintent {

inline constexpr std::array<std::string_view, 7> kIntentLabels = {
    "SearchCreativeWork", "GetWeather",   "BookRestaurant",      "PlayMusic",
    "AddToPlaylist",      "RateBook",     "SearchScreeningEvent"};

// Synthetic Hindi-English code-mix utterances: per-intent templates mixing
// romanized Hindi function words with English slot fillers, with seeded
// spelling variants ("kya"/"kia", "hai"/"he", ...). Exactly n_per_intent
// records per intent, interleaved by intent; deterministic under seed.
LabeledDataset generate_codemix(std::uint64_t seed, std::size_t n_per_intent);

}  // namespace mixintent

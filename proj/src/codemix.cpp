#include "mixintent/codemix.hpp"

#include <map>
#include <string>
#include <vector>

#include "mixintent/error.hpp"
#include "mixintent/rng.hpp"

namespace mixintent {
namespace {

using WordList = std::vector<std::string_view>;

const std::map<std::string_view, WordList>& slot_values() {
  static const std::map<std::string_view, WordList> slots = {
      {"song", {"tum hi ho", "kesariya", "shape of you", "blinding lights", "channa mereya", "believer", "senorita",
                "kal ho na ho", "apna time aayega", "perfect", "levitating", "zinda", "malang", "hotel california",
                "bohemian rhapsody", "raabta", "photograph", "kun faya kun"}},
      {"artist", {"arijit singh", "ar rahman", "shreya ghoshal", "taylor swift", "ed sheeran", "badshah",
                  "the weeknd", "kishore kumar", "lata mangeshkar", "coldplay", "divine", "neha kakkar",
                  "atif aslam", "imagine dragons"}},
      {"playlist", {"workout mix", "road trip", "chill vibes", "party anthems", "lofi beats", "sad songs",
                    "morning motivation", "bollywood hits", "rainy day", "throwback", "focus", "gym"}},
      {"city", {"mumbai", "delhi", "pune", "bangalore", "chennai", "kolkata", "jaipur", "goa", "london",
                "new york", "lucknow", "hyderabad", "shimla", "indore"}},
      {"weather", {"barish", "dhoop", "thand", "garmi", "toofan", "snow", "fog", "aandhi"}},
      {"time", {"aaj", "kal", "parso", "weekend pe", "shaam ko", "subah", "raat ko", "next week", "monday ko",
                "friday ko", "abhi", "8 baje"}},
      {"cuisine", {"italian", "chinese", "punjabi", "south indian", "mughlai", "thai", "pizza", "biryani",
                   "continental", "gujarati"}},
      {"restaurant", {"haldiram", "barbeque nation", "social", "theobroma", "mainland china", "pizza hut",
                      "bikanervala", "toit", "the bombay canteen", "saravana bhavan"}},
      {"party", {"2", "3", "4", "5", "6", "8", "do", "teen", "char", "paanch"}},
      {"book", {"the secret", "harry potter", "the alchemist", "godaan", "gitanjali", "wings of fire", "sapiens",
                "atomic habits", "the white tiger", "madhushala", "malgudi days", "ikigai"}},
      {"movie", {"sholay", "dangal", "3 idiots", "lagaan", "inception", "interstellar", "pathaan", "jawan", "kgf",
                 "avengers", "dil chahta hai", "zindagi na milegi dobara", "rrr", "oppenheimer"}},
      {"work", {"movie", "film", "song", "album", "tv show", "series", "book", "game", "trailer", "soundtrack",
                "novel", "web series"}},
      {"cinema", {"pvr", "inox", "cinepolis", "carnival", "imax", "miraj", "maxus", "wave cinemas"}},
      {"rating", {"1", "2", "3", "4", "5", "6", "ek", "do", "teen", "char", "paanch"}},
      {"scale", {"5", "6", "10"}},
  };
  return slots;
}

// Romanized Hindi (and chat-English) spellings drift; each listed word is
// replaced by a random variant half of the time.
const std::map<std::string_view, WordList>& spelling_variants() {
  static const std::map<std::string_view, WordList> variants = {
      {"kya", {"kia", "kyaa", "kiya"}},        {"hai", {"he", "h", "hain"}},
      {"mujhe", {"muje", "mujhey", "mjhe"}},   {"karo", {"kro", "krdo", "kar do"}},
      {"chahiye", {"chahie", "chaiye", "chahiya"}}, {"bajao", {"bajaao", "baja do", "chalao"}},
      {"mein", {"me", "main", "mai"}},         {"aaj", {"aj"}},
      {"liye", {"lie", "liya"}},               {"dikhao", {"dikhaao", "dikha do"}},
      {"batao", {"btao", "bata do", "bataao"}}, {"yaar", {"yar", "yrr"}},
      {"please", {"plz", "pls", "plzz"}},      {"wala", {"vala", "waala"}},
      {"wali", {"vali", "waali"}},             {"kaisa", {"kesa", "kaisaa"}},
      {"mausam", {"mosam", "mausum"}},         {"rahega", {"rhega", "rahegaa"}},
      {"dhundo", {"dhoondo", "dhundho", "dhoondho"}}, {"kitne", {"kitni", "ktne"}},
      {"baje", {"bje"}},                       {"rahi", {"rhi"}},
      {"gaana", {"gana", "gaanaa"}},           {"kitab", {"kitaab", "kitaap"}},
      {"dena", {"dedo", "dijiye"}},            {"de", {"dee"}},
      {"daal", {"dal", "dall"}},               {"logon", {"logo", "logon"}},
      {"naam", {"nam", "naam"}},               {"sunna", {"sunana", "sunni"}},
      {"hogi", {"hogee", "hoga"}},             {"abhi", {"abi", "abhee"}},
      {"kahan", {"kaha", "kahaan"}},           {"milega", {"milegaa", "mil jayega"}},
      {"kaunsi", {"konsi", "kaun si"}},        {"baare", {"bare", "baarey"}},
      {"ko", {"ku", "koh"}},                   {"tickets", {"ticket", "tix"}},
  };
  return variants;
}

struct Template {
  std::string_view intent;
  std::string_view pattern;
};

const std::vector<Template>& templates() {
  static const std::vector<Template> all = {
      {"PlayMusic", "{artist} ka {song} bajao"},
      {"PlayMusic", "mujhe {song} sunna hai"},
      {"PlayMusic", "{song} gaana bajao please"},
      {"PlayMusic", "koi {artist} ka gaana bajao"},
      {"PlayMusic", "play {song} by {artist}"},
      {"PlayMusic", "{artist} ke songs bajao yaar"},
      {"PlayMusic", "{song} play karo"},
      {"AddToPlaylist", "{song} ko {playlist} playlist mein daal do"},
      {"AddToPlaylist", "{artist} ka gaana {playlist} mein add karo"},
      {"AddToPlaylist", "mere {playlist} playlist mein {song} add kar do"},
      {"AddToPlaylist", "add {song} to {playlist}"},
      {"AddToPlaylist", "{playlist} wali playlist mein ye gaana daal do"},
      {"AddToPlaylist", "is {artist} track ko {playlist} mein jodo"},
      {"GetWeather", "{time} {city} mein mausam kaisa rahega"},
      {"GetWeather", "kya {time} {city} mein {weather} hogi"},
      {"GetWeather", "{city} ka weather batao"},
      {"GetWeather", "{time} ka temperature kya hai {city} mein"},
      {"GetWeather", "weather forecast for {city} {time}"},
      {"GetWeather", "{city} mein {weather} hai kya abhi"},
      {"BookRestaurant", "{city} mein {cuisine} restaurant mein {party} logon ke liye table book karo"},
      {"BookRestaurant", "{restaurant} mein {time} {party} logon ka table chahiye"},
      {"BookRestaurant", "mujhe {party} logon ke liye {cuisine} khane ki booking karni hai"},
      {"BookRestaurant", "book a table at {restaurant} for {party}"},
      {"BookRestaurant", "{time} dinner ke liye {restaurant} reserve karo"},
      {"BookRestaurant", "{restaurant} mein {party} seats book kar do {time}"},
      {"RateBook", "{book} ko {rating} out of {scale} de do"},
      {"RateBook", "give {book} {rating} stars"},
      {"RateBook", "{book} kitab ko {rating} rating de do"},
      {"RateBook", "is book ko {rating} points dena hai {scale} mein se"},
      {"RateBook", "{book} ke liye meri rating {rating} hai"},
      {"RateBook", "rate {book} {rating} out of {scale}"},
      {"SearchCreativeWork", "{work} {movie} dhundo"},
      {"SearchCreativeWork", "mujhe {book} naam ka {work} dikhao"},
      {"SearchCreativeWork", "{song} {work} kahan milega"},
      {"SearchCreativeWork", "find the {work} called {movie}"},
      {"SearchCreativeWork", "kya tum {book} {work} search kar sakte ho"},
      {"SearchCreativeWork", "{movie} ke baare mein batao"},
      {"SearchScreeningEvent", "{cinema} mein {movie} kitne baje lagi hai"},
      {"SearchScreeningEvent", "{time} {city} mein kaunsi movies chal rahi hai"},
      {"SearchScreeningEvent", "{movie} ka show time batao {cinema} mein"},
      {"SearchScreeningEvent", "{movie} ke tickets {time} ke liye dikhao"},
      {"SearchScreeningEvent", "nearby {cinema} mein film schedule kya hai"},
      {"SearchScreeningEvent", "find showtimes for {movie} at {cinema}"},
  };
  return all;
}

constexpr std::array<std::string_view, 6> kOpeners = {"yaar", "bhai", "please", "hey", "acha", "suno"};
constexpr std::array<std::string_view, 5> kClosers = {"please", "yaar", "?", "!!", "jaldi"};

template <typename List>
const typename List::value_type& pick(const List& list, RngStream& rng) {
  return list[rng.below(list.size())];
}

std::string fill(std::string_view pattern, RngStream& rng) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size();) {
    if (pattern[i] == '{') {
      const std::size_t close = pattern.find('}', i);
      const std::string_view slot = pattern.substr(i + 1, close - i - 1);
      out.append(pick(slot_values().at(slot), rng));
      i = close + 1;
    } else {
      out.push_back(pattern[i++]);
    }
  }
  return out;
}

std::string vary_spelling(const std::string& sentence, RngStream& rng) {
  std::string out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    std::size_t j = sentence.find(' ', i);
    if (j == std::string::npos) j = sentence.size();
    const std::string_view word(sentence.data() + i, j - i);
    auto it = spelling_variants().find(word);
    if (!out.empty()) out.push_back(' ');
    if (it != spelling_variants().end() && rng.uniform() < 0.5) {
      out.append(pick(it->second, rng));
    } else {
      out.append(word);
    }
    i = j + 1;
  }
  return out;
}

std::string decorate(std::string sentence, RngStream& rng) {
  if (rng.uniform() < 0.15) sentence = std::string(pick(kOpeners, rng)) + " " + sentence;
  if (rng.uniform() < 0.15) {
    const std::string_view closer = pick(kClosers, rng);
    if (closer.front() == '?' || closer.front() == '!') {
      sentence.append(closer);
    } else {
      sentence.append(" ").append(closer);
    }
  }
  if (rng.uniform() < 0.3 && !sentence.empty() && sentence[0] >= 'a' && sentence[0] <= 'z') {
    sentence[0] = static_cast<char>(sentence[0] - 'a' + 'A');
  }
  return sentence;
}

}  // namespace

LabeledDataset generate_codemix(std::uint64_t seed, std::size_t n_per_intent) {
  if (n_per_intent == 0) throw ArgumentError("n_per_intent must be positive");
  std::map<std::string_view, std::vector<const Template*>> by_intent;
  for (const Template& t : templates()) by_intent[t.intent].push_back(&t);

  RngStream rng(mix_seed(seed, "codemix"));
  std::vector<Record> records;
  records.reserve(n_per_intent * kIntentLabels.size());
  for (std::size_t i = 0; i < n_per_intent; ++i) {
    for (std::string_view intent : kIntentLabels) {
      const Template* t = pick(by_intent.at(intent), rng);
      std::string text = decorate(vary_spelling(fill(t->pattern, rng), rng), rng);
      records.push_back({Utterance(std::move(text)), std::string(intent)});
    }
  }
  return LabeledDataset(std::move(records));
}

}  // namespace mixintent

#include "abandon/text/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "abandon/common/error.hpp"

namespace abandon::text {

Lexicon Lexicon::parse(std::string_view content, const std::string& origin) {
  Lexicon lex;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string term;
    fields >> term;
    double weight = 1.0;
    std::string w;
    if (fields >> w) {
      try {
        std::size_t used = 0;
        weight = std::stod(w, &used);
        if (used != w.size()) throw std::invalid_argument(w);
      } catch (const std::exception&) {
        throw DataError(origin + ":" + std::to_string(lineno) + ": bad weight '" + w + "'");
      }
    }
    for (auto& c : term) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    lex.set(std::move(term), weight);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::vector<std::string> Lexicon::terms() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& [t, _] : terms_) out.push_back(t);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Valences on a -4..4 scale.
constexpr const char* kValence = R"(
good 1.9
great 3.1
excellent 3.2
amazing 2.8
awesome 3.1
wonderful 2.7
nice 1.8
love 3.2
loved 2.9
lovely 2.8
like 1.5
liked 1.8
happy 2.7
glad 2.0
enjoy 2.2
enjoyed 2.3
fun 2.3
funny 1.9
best 3.2
better 1.9
beautiful 2.9
brilliant 2.8
cool 1.3
interesting 1.7
thanks 1.9
thank 1.5
helpful 1.8
agree 1.5
right 1.0
correct 1.3
fair 1.3
hope 1.9
hopeful 1.8
win 2.8
winning 2.4
welcome 2.0
friend 2.2
friends 2.1
kind 2.4
support 1.7
respect 2.1
peace 2.5
safe 1.9
strong 2.3
smart 1.7
proud 2.1
perfect 2.7
true 1.3
yes 1.2
wow 2.3
lol 1.8
haha 2.0
bad -2.5
terrible -2.1
horrible -2.5
awful -2.0
worst -3.1
worse -2.1
hate -2.7
hated -3.2
hating -2.3
angry -2.3
mad -2.2
sad -2.1
sorry -0.3
wrong -2.1
stupid -2.4
idiot -2.3
dumb -2.3
moron -2.2
pathetic -2.2
disgusting -2.4
ugly -2.3
trash -1.5
garbage -1.8
sick -1.8
kill -3.7
killed -3.5
dead -3.3
die -2.9
death -2.9
war -2.9
fight -1.6
attack -2.1
destroy -2.4
problem -1.7
fail -2.3
failed -2.3
failure -2.3
lose -1.3
lost -1.3
loser -2.4
lie -1.6
liar -2.5
lies -1.8
fear -2.2
afraid -2.2
scared -1.9
worried -1.2
annoying -1.7
boring -1.3
crap -1.6
shit -2.6
damn -1.7
sucks -1.5
suck -1.2
worthless -2.8
useless -1.8
evil -3.4
corrupt -2.6
censorship -1.4
banned -2.0
ban -2.6
unfair -2.1
crazy -1.4
broken -1.8
fake -2.1
)";

constexpr const char* kNegations = R"(
not
no
never
nor
none
nobody
nothing
neither
nowhere
cannot
can't
cant
don't
dont
doesn't
doesnt
didn't
didnt
isn't
isnt
aren't
arent
wasn't
wasnt
weren't
werent
won't
wont
wouldn't
wouldnt
shouldn't
shouldnt
couldn't
couldnt
haven't
havent
hasn't
hasnt
without
)";

constexpr const char* kToxicity = R"(
idiot
idiots
stupid
moron
morons
dumb
loser
losers
pathetic
trash
garbage
disgusting
scum
clown
clowns
fool
jerk
worthless
crap
shit
fuck
fucking
ass
asshole
bitch
bastard
bullshit
damn
sucks
hate
shut
retarded 1.5
subhuman 1.5
vermin 1.5
parasites 1.2
degenerates 1.2
savages 1.2
kill
die
)";

constexpr const char* kSevereToxicity = R"(
fuck
fucking
motherfucker 1.5
cunt 1.5
subhuman
vermin
kill
die
)";

constexpr const char* kObscene = R"(
fuck
fucking
fucked
shit
shitty
ass
asshole
bitch
bastard
dick
piss
pissed
bullshit
crap
damn
motherfucker 1.5
cunt 1.5
)";

constexpr const char* kInsult = R"(
idiot
idiots
stupid
moron
morons
dumb
dumbass
loser
losers
pathetic
clown
clowns
fool
fools
jerk
worthless
ignorant
imbecile
cretin
coward
cowards
liar
liars
asshole
bitch
scum
retarded
)";

constexpr const char* kIdentityAttack = R"(
subhuman
vermin
invaders
degenerate
degenerates
parasites
savages
inferior
mongrels
)";

constexpr const char* kThreat = R"(
kill
killing
murder
shoot
hang
stab
bury
burn
hunt
destroy
punch
beat
die
)";

}  // namespace

const char* const kToxicityDimNames[kToxicityDims] = {"toxicity", "severe_toxicity", "obscene",
                                                      "insult",   "identity_attack", "threat"};

const Lexicon& default_valence_lexicon() {
  static const Lexicon lex = Lexicon::parse(kValence, "builtin valence");
  return lex;
}

const Lexicon& negation_terms() {
  static const Lexicon lex = Lexicon::parse(kNegations, "builtin negations");
  return lex;
}

const Lexicon& default_toxicity_lexicon(int dim) {
  static const Lexicon tables[kToxicityDims] = {
      Lexicon::parse(kToxicity, "builtin toxicity"),   Lexicon::parse(kSevereToxicity, "builtin severe_toxicity"),
      Lexicon::parse(kObscene, "builtin obscene"),     Lexicon::parse(kInsult, "builtin insult"),
      Lexicon::parse(kIdentityAttack, "builtin identity_attack"), Lexicon::parse(kThreat, "builtin threat")};
  if (dim < 0 || dim >= kToxicityDims) throw UsageError("toxicity dimension out of range");
  return tables[dim];
}

}  // namespace abandon::text

#include "mailocr/harness.hpp"

namespace mailocr {

// Label vocabulary for generated datasets; doubles as the attacker's domain
// lexicon. Everything fits the default 160px canvas (max 6 characters).
const std::vector<std::string>& default_labels() {
    static const std::vector<std::string> words = {
        "ALERT",  "AMOUNT", "APRIL",  "AUDIT",  "BADGE",  "BANK",   "BILL",
        "BONUS",  "BOX",    "CARD",   "CASE",   "CASH",   "CHECK",  "CITY",
        "CLAIM",  "CLERK",  "CODE",   "COPY",   "COURT",  "CREDIT", "DATE",
        "DEBIT",  "DOLLAR", "DRAFT",  "DRIVE",  "EAGLE",  "EAST",   "EIGHT",
        "ENTRY",  "FIVE",   "FORM",   "FOUR",   "FRAUD",  "FUND",   "GRANT",
        "GROUP",  "HELLO",  "HOUSE",  "INCOME", "ISSUE",  "JUDGE",  "JULY",
        "JUNE",   "LEASE",  "LEDGER", "LEGAL",  "LETTER", "LOAN",   "MAIL",
        "MARCH",  "MEMO",   "MONEY",  "MONTH",  "NINE",   "NORTH",  "NOTE",
        "NOTICE", "NUMBER", "OFFER",  "ORDER",  "OWNER",  "PAPER",  "PHONE",
        "PLAN",   "POINT",  "POST",   "PRICE",  "PRIZE",  "PROOF",  "QUOTE",
        "RATE",   "REBATE", "REFUND", "RENT",   "REPLY",  "REPORT", "RETURN",
        "ROUTE",  "SEAL",   "SECRET", "SEVEN",  "SHARE",  "SIGN",   "SOUTH",
        "STAMP",  "STATE",  "STOCK",  "STREET", "TAX",    "TEN",    "THREE",
        "TITLE",  "TOKEN",  "TOTAL",  "TRACE",  "TRADE",  "TRUST",  "UNION",
        "VALUE",  "VAULT",  "WAGE",   "WEST",   "WIRE",   "WORLD",  "YEAR",
        "YIELD",  "ZERO",   "ZONE",
        // form numbers and ZIP codes
        "100",    "365",    "500",    "1040",   "2048",   "12345",  "41500",
        "60601",  "77001",  "90210",
    };
    return words;
}

// Common 3-6 letter English words in rough frequency order; weights fall
// off Zipf-style. Superset of most alphabetic labels, which is what a real
// dictionary would look like.
const std::vector<std::pair<std::string, double>>& general_words() {
    static const std::vector<std::pair<std::string, double>> weighted = [] {
        static const char* const words[] = {
            "THE",    "AND",    "FOR",    "ARE",    "BUT",    "NOT",    "YOU",
            "ALL",    "ANY",    "CAN",    "HAD",    "HER",    "WAS",    "ONE",
            "OUR",    "OUT",    "DAY",    "GET",    "HAS",    "HIM",    "HIS",
            "HOW",    "MAN",    "NEW",    "NOW",    "OLD",    "SEE",    "TWO",
            "WAY",    "WHO",    "BOY",    "DID",    "ITS",    "LET",    "PUT",
            "SAY",    "SHE",    "TOO",    "USE",    "THAT",   "WITH",   "HAVE",
            "THIS",   "WILL",   "YOUR",   "FROM",   "THEY",   "KNOW",   "WANT",
            "BEEN",   "GOOD",   "MUCH",   "SOME",   "TIME",   "VERY",   "WHEN",
            "COME",   "HERE",   "JUST",   "LIKE",   "LONG",   "MAKE",   "MANY",
            "MORE",   "ONLY",   "OVER",   "SUCH",   "TAKE",   "THAN",   "THEM",
            "WELL",   "WERE",   "WHAT",   "WORD",   "WORK",   "YEAR",   "BACK",
            "CALL",   "CAME",   "EACH",   "EVEN",   "FIND",   "GIVE",   "HAND",
            "HIGH",   "KEEP",   "LAST",   "LEFT",   "LIFE",   "LIVE",   "LOOK",
            "MADE",   "MOST",   "MOVE",   "MUST",   "NAME",   "NEED",   "NEXT",
            "OPEN",   "PART",   "PLAY",   "SAID",   "SAME",   "SEEM",   "SHOW",
            "SIDE",   "TELL",   "THEN",   "THING",  "THINK",  "TURN",   "USED",
            "WANT",   "WAYS",   "WEEK",   "WENT",   "WERE",   "ABOUT",  "AFTER",
            "AGAIN",  "BEING",  "BELOW",  "COULD",  "EVERY",  "FIRST",  "FOUND",
            "GREAT",  "GROUP",  "HOUSE",  "LARGE",  "LEARN",  "NEVER",  "OTHER",
            "PLACE",  "PLANT",  "POINT",  "RIGHT",  "SMALL",  "SOUND",  "SPELL",
            "STILL",  "STUDY",  "THEIR",  "THERE",  "THESE",  "THING",  "THINK",
            "THREE",  "WATER",  "WHERE",  "WHICH",  "WHILE",  "WORLD",  "WOULD",
            "WRITE",  "ALWAYS", "ANIMAL", "ANSWER", "BECOME", "BEFORE", "BETTER",
            "CHANGE", "FAMILY", "FATHER", "FRIEND", "LETTER", "LITTLE", "LIVING",
            "MOTHER", "NUMBER", "PEOPLE", "PLEASE", "SCHOOL", "SHOULD", "SYSTEM",
            "ALERT",  "AMOUNT", "APRIL",  "AUDIT",  "BADGE",  "BANK",   "BAND",
            "BASE",   "BEAR",   "BEAT",   "BELL",   "BEST",   "BILL",   "BIRD",
            "BLOCK",  "BLOOD",  "BOARD",  "BOAT",   "BODY",   "BONE",   "BONUS",
            "BOOK",   "BORN",   "BOTH",   "BREAD",  "BREAK",  "BRING",  "BROWN",
            "BUILD",  "BURN",   "BUSY",   "CARD",   "CARE",   "CARRY",  "CASE",
            "CASH",   "CATCH",  "CAUSE",  "CELL",   "CENT",   "CHAIR",  "CHART",
            "CHECK",  "CHIEF",  "CHILD",  "CITY",   "CLAIM",  "CLASS",  "CLEAN",
            "CLEAR",  "CLERK",  "CLIMB",  "CLOCK",  "CLOSE",  "CLOTH",  "CLOUD",
            "COAST",  "COAT",   "CODE",   "COLD",   "COLOR",  "COPY",   "CORN",
            "COST",   "COUNT",  "COURT",  "COVER",  "CREDIT", "CROP",   "CROSS",
            "CROWD",  "DANCE",  "DARK",   "DATE",   "DEAL",   "DEATH",  "DEBIT",
            "DECIDE", "DEEP",   "DESERT", "DESIGN", "DIRECT", "DOCTOR", "DOLLAR",
            "DOOR",   "DOUBLE", "DOWN",   "DRAFT",  "DRAW",   "DREAM",  "DRESS",
            "DRINK",  "DRIVE",  "DROP",   "EAGLE",  "EARLY",  "EARTH",  "EAST",
            "EASY",   "EDGE",   "EIGHT",  "ENERGY", "ENGINE", "ENOUGH", "ENTER",
            "ENTRY",  "EQUAL",  "EVENT",  "FACE",   "FACT",   "FAIR",   "FALL",
            "FARM",   "FAST",   "FEAR",   "FEED",   "FEEL",   "FEET",   "FELL",
            "FIELD",  "FIGHT",  "FILL",   "FINAL",  "FINE",   "FIRE",   "FISH",
            "FIVE",   "FLOOR",  "FLOW",   "FOOD",   "FOOT",   "FORCE",  "FOREST",
            "FORM",   "FOUR",   "FRAUD",  "FREE",   "FRESH",  "FRONT",  "FRUIT",
            "FULL",   "FUND",   "GAME",   "GARDEN", "GIRL",   "GLAD",   "GLASS",
            "GOLD",   "GONE",   "GRANT",  "GRASS",  "GREEN",  "GROW",   "GUESS",
            "GUIDE",  "HAIR",   "HALF",   "HALL",   "HAPPY",  "HARD",   "HEAD",
            "HEAR",   "HEART",  "HEAT",   "HEAVY",  "HELD",   "HELLO",  "HELP",
            "HILL",   "HOLD",   "HOME",   "HOPE",   "HORSE",  "HOUR",   "HUMAN",
            "IDEA",   "INCH",   "INCOME", "IRON",   "ISSUE",  "ITEM",   "JUDGE",
            "JULY",   "JUMP",   "JUNE",   "KEPT",   "KIND",   "KING",   "KNEW",
            "LADY",   "LAKE",   "LAND",   "LATE",   "LEAD",   "LEASE",  "LEAVE",
            "LEDGER", "LEGAL",  "LESS",   "LIGHT",  "LINE",   "LIST",   "LOAN",
            "LOCAL",  "LOST",   "LOUD",   "LOVE",   "LOWER",  "MAIL",   "MAIN",
            "MAJOR",  "MARCH",  "MARK",   "MATTER", "MEAN",   "MEET",   "MEMO",
            "METAL",  "MILE",   "MILK",   "MIND",   "MINE",   "MISS",   "MODEL",
            "MOMENT", "MONEY",  "MONTH",  "MOON",   "MOUNT",  "MOUTH",  "MUSIC",
            "NEAR",   "NIGHT",  "NINE",   "NOISE",  "NORTH",  "NOSE",   "NOTE",
            "NOTICE", "OCEAN",  "OFFER",  "OFFICE", "ORDER",  "OWNER",  "PAGE",
            "PAINT",  "PAIR",   "PAPER",  "PARK",   "PARTY",  "PASS",   "PAST",
            "PEACE",  "PHONE",  "PICK",   "PLAIN",  "PLAN",   "PLANE",  "POINT",
            "POST",   "POUND",  "POWER",  "PRESS",  "PRICE",  "PRINT",  "PRIZE",
            "PROOF",  "PROVE",  "PULL",   "PURE",   "PUSH",   "QUEEN",  "QUICK",
            "QUIET",  "QUITE",  "QUOTE",  "RACE",   "RAIN",   "RAISE",  "RANGE",
            "RATE",   "REACH",  "READ",   "READY",  "REASON", "REBATE", "RECORD",
            "REFUND", "REGION", "REMAIN", "RENT",   "REPLY",  "REPORT", "REST",
            "RESULT", "RETURN", "RICH",   "RIDE",   "RING",   "RISE",   "RIVER",
            "ROAD",   "ROCK",   "ROLL",   "ROOM",   "ROOT",   "ROSE",   "ROUND",
            "ROUTE",  "RULE",   "SAFE",   "SAIL",   "SALT",   "SAND",   "SCALE",
            "SCENE",  "SCORE",  "SEAL",   "SEAT",   "SECOND", "SECRET", "SEED",
            "SELL",   "SEND",   "SENSE",  "SERVE",  "SEVEN",  "SHAPE",  "SHARE",
            "SHARP",  "SHIP",   "SHOE",   "SHOP",   "SHORT",  "SHOUT",  "SIGN",
            "SILVER", "SIMPLE", "SINCE",  "SING",   "SIZE",   "SKIN",   "SLEEP",
            "SLOW",   "SNOW",   "SOFT",   "SOIL",   "SOLD",   "SONG",   "SOON",
            "SOUTH",  "SPACE",  "SPEAK",  "SPEED",  "SPEND",  "SPOT",   "SPRING",
            "SQUARE", "STAFF",  "STAGE",  "STAMP",  "STAND",  "STAR",   "START",
            "STATE",  "STAY",   "STEP",   "STICK",  "STOCK",  "STONE",  "STOOD",
            "STOP",   "STORE",  "STORM",  "STORY",  "STREET", "STRONG", "SUGAR",
            "SUMMER", "TABLE",  "TAIL",   "TALK",   "TALL",   "TEACH",  "TEAM",
            "TERM",   "TEST",   "TEXT",   "THICK",  "THIN",   "TITLE",  "TODAY",
            "TOKEN",  "TOLD",   "TONE",   "TOOK",   "TOOL",   "TOTAL",  "TOUCH",
            "TOWN",   "TRACE",  "TRACK",  "TRADE",  "TRAIN",  "TREE",   "TRIP",
            "TRUCK",  "TRUE",   "TRUST",  "TRUTH",  "UNDER",  "UNION",  "UNIT",
            "UNTIL",  "UPON",   "VALLEY", "VALUE",  "VAULT",  "VIEW",   "VOICE",
            "VOTE",   "WAGE",   "WAIT",   "WALK",   "WALL",   "WARM",   "WATCH",
            "WAVE",   "WEAR",   "WEST",   "WHEEL",  "WHITE",  "WHOLE",  "WIDE",
            "WIFE",   "WILD",   "WIND",   "WINDOW", "WINTER", "WIRE",   "WISE",
            "WISH",   "WOOD",   "WROTE",  "YARD",   "YIELD",  "YOUNG",  "ZERO",
            "ZONE",
        };
        std::vector<std::pair<std::string, double>> out;
        out.reserve(std::size(words));
        double freq = 4000;
        for (const char* w : words) {
            out.emplace_back(w, freq);
            freq = freq > 10 ? freq - 6 : 10;
        }
        return out;
    }();
    return weighted;
}

}  // namespace mailocr

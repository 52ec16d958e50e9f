#pragma once

#include <stdexcept>
#include <string>

namespace yotta {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// content_store
struct EmptyPayload : Error { EmptyPayload() : Error("empty payload") {} };
struct NotFound : Error { explicit NotFound(const std::string& what) : Error("not found: " + what) {} };

// crypto
struct EmptyPlaintext : Error { EmptyPlaintext() : Error("empty plaintext") {} };
struct AuthFailure : Error { AuthFailure() : Error("authenticated decryption failed") {} };
struct InvalidElement : Error { InvalidElement() : Error("value is not a group member") {} };

// proof
struct MalformedProof : Error { explicit MalformedProof(const std::string& what) : Error("malformed proof: " + what) {} };
struct MixedBackends : Error { MixedBackends() : Error("batch mixes proof backends") {} };
struct EmptyBatch : Error { EmptyBatch() : Error("empty proof batch") {} };
struct CountMismatch : Error { CountMismatch() : Error("statement count does not match aggregate") {} };
struct UnknownEval : Error { explicit UnknownEval(const std::string& id) : Error("unknown eval function: " + id) {} };

// ledger
struct InsufficientFunds : Error { InsufficientFunds() : Error("insufficient funds") {} };
struct PastDeadline : Error { PastDeadline() : Error("deadline not in the future") {} };
struct EmptyEntries : Error { EmptyEntries() : Error("escrow needs at least one entry") {} };
struct UnknownContract : Error { UnknownContract() : Error("unknown contract id") {} };
struct UnknownSeller : Error { UnknownSeller() : Error("no entry for seller") {} };
struct AlreadySettled : Error { AlreadySettled() : Error("entry already settled") {} };
struct DeadlinePassed : Error { DeadlinePassed() : Error("deadline passed") {} };
struct DeadlineNotReached : Error { DeadlineNotReached() : Error("deadline not reached") {} };
struct CorruptLog : Error {
    std::size_t index;
    explicit CorruptLog(std::size_t i, const std::string& what)
        : Error("corrupt log at record " + std::to_string(i) + ": " + what), index(i) {}
};

// protocol / cli
struct EmptyData : Error { EmptyData() : Error("empty data") {} };
struct InvalidConfig : Error { explicit InvalidConfig(const std::string& what) : Error("invalid config: " + what) {} };
struct IntegrityFailure : Error {
    std::string stage;
    explicit IntegrityFailure(const std::string& s) : Error("integrity failure at stage: " + s), stage(s) {}
};

}  // namespace yotta

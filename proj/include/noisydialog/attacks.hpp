#pragma once

#include <memory>

#include "noisydialog/channel.hpp"
#include "noisydialog/party.hpp"

namespace nd {

// Attack scripts expose whether they ran to completion so experiments can
// separate "the protocol beat the attack" from "the script never fired".
class ScriptedAttack : public Adversary {
 public:
  virtual bool completed() const = 0;
  virtual bool degraded() const = 0;  // preconditions never arose; idled
};

// Repeated shallow-desync cycles: knock one heard simulation bit loose at a
// depth whose close-by meeting points are about to be forgotten, suppress
// every early rewind vote, and let the parties resolve at the top of the
// vote window. With the memory-backed candidate enabled the rewind is one
// step; without it the arithmetic candidates force a deep rewind.
std::unique_ptr<ScriptedAttack> make_figure1_attack(const DerivedParams& dp,
                                                    int64_t max_cycles = 8);

// Staged deep-dive: stall one party with single-bit counter corruption while
// walking the other past a meeting point it then forgets, resolve the dive
// with forged votes, force a short opposing rewind, and finally steer both
// parties into a joint jump below every point that still remembers the dive.
std::unique_ptr<ScriptedAttack> make_sneaky_attack(const DerivedParams& dp);

}  // namespace nd

// Copyright (c) the mapsep contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mapsep {

enum class DiagCode {
    SyntaxError,
    MapEqualityAssume,   // assume over map variables is not part of the language
    EdgeIntoInitial,
    UndeclaredVariable,
    DuplicateDeclaration,
    ReservedIdentifier,
    SortMismatch,
    IrFormNotAllowed,    // atomic{}/havoc_eq/wid literals outside IR mode
    StrictGrammarViolation,
    InvalidStoreOperand,
    NotNormalized,
    AlreadyInstrumented,
    InconsistentPartition,
    LabelMismatch,
    StateSpaceBudgetExceeded,
    MapHavocDomainTooLarge,
    DomainTooSmall,
    InvalidArgument,
};

const char* diag_code_name(DiagCode code);

// Error type thrown by the parser and the pipeline stages. Line/column are
// 1-based; 0 means "not tied to a source position".
class Diagnostic : public std::runtime_error {
  public:
    Diagnostic(DiagCode code, std::string message, int line = 0, int col = 0);

    DiagCode code() const { return code_; }
    int line() const { return line_; }
    int col() const { return col_; }

  private:
    DiagCode code_;
    int line_;
    int col_;
};

class BudgetExceeded : public Diagnostic {
  public:
    explicit BudgetExceeded(std::string message)
        : Diagnostic(DiagCode::StateSpaceBudgetExceeded, std::move(message)) {}
};

}  // namespace mapsep

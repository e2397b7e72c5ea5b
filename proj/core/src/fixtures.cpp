// SPDX-License-Identifier: Apache-2.0
// Benchmark problems with reference programs. Golds are certified by the oracles in the test suite.
#include "prolite/harness.hpp"

namespace prolite {

namespace {

ProblemRecord make(std::string id, Category cat, std::string statement, std::int64_t gold, std::optional<int> ent,
                   std::string program) {
    ProblemRecord r;
    r.id = std::move(id);
    r.category = cat;
    r.statement = std::move(statement);
    r.gold = Rational(gold);
    r.entanglement = ent;
    r.reference_program = std::move(program);
    return r;
}

const char* kFourDigit = R"PL(problem(Number):-
Number #= 1000 * Digit4 + 100 * Digit3 + 10 * Digit2 + Digit1,
Digit1 #>= 0, Digit1 #< 10,
Digit2 #>= 0, Digit2 #< 10,
Digit3 #>= 0, Digit3 #< 10,
Digit4 #> 0, Digit4 #< 10,
Digit1 mod 2 #\= 0,
Digit1 + Digit2 + Digit3 + Digit4 #= 20,
Digit4 #> Digit3,
Digit3 #> Digit2,
Digit2 #> Digit1,
(4 * Digit1 #= Digit2; 4 * Digit1 #= Digit3; 4 * Digit1 #= Digit4;4 * Digit2 #= Digit1;4 * Digit2 #= Digit3; 4 * Digit2 #= Digit4; 4 * Digit3 #= Digit1; 4 * Digit3 #= Digit2;4 * Digit3 #= Digit4;4 * Digit4 #= Digit1; 4 * Digit4 #= Digit2; 4 * Digit4 #= Digit3),
abs(Digit3 - Digit2) #> 3.
)PL";

const char* kLine = R"PL(% Positions count from 1, left to right; "behind" means one position later.
problem(Alex) :-
    Bob = 7,
    [Alex, Chad, Frank, Sam] ins 1..20,
    % four people stand between Bob and Alex
    abs(Bob - Alex) #= 5,
    Chad #= Bob + 1,
    Frank #= Alex + 1,
    Sam #= Bob - 1,
    % two people stand between Sam and Frank
    abs(Sam - Frank) #= 3,
    label([Alex, Chad, Frank, Sam]).
)PL";

const char* kBirds2 = R"PL(% A and B are the current populations.
problem(Total) :-
    { A + 3 = 2 * (B - 3),
      B + 2 = (A - 2) + 1,
      Total = A + B }.
)PL";

const char* kBirds3 = R"PL(% Moves are hypothetical; every equation uses current populations.
problem(Total) :-
    % 2 from C and 1 from B join A: A doubles what is left in C
    { A + 3 = 2 * (C - 2),
      % after that move A equals B's current population
      A + 3 = B,
      % 1 from A and 3 from C join B: B doubles what is left in A
      B + 4 = 2 * (A - 1),
      Total = A + B + C }.
)PL";

const char* kBirds4 = R"PL(% Moves are hypothetical; every equation uses current populations.
problem(Total) :-
    % 1 from C and 1 from A join D: D is half of what is left in A
    { D + 2 = (A - 1) / 2,
      % after that move A and C together equal B
      (A - 1) + (C - 1) = B,
      % 5 from C and 5 from D join B: B is twice A
      B + 10 = 2 * A,
      % after that move C has 2 more than D
      C - 5 = (D - 5) + 2,
      Total = A + B + C + D }.
)PL";

const char* kAge = R"PL(% Me is my current age. Going back Me - Me/k years gives each relative's stated age.
problem(Me) :-
    { Father = 30 + Me / 2,
      Mother = 25 + 2 * Me / 3,
      Sister = 7 + 5 * Me / 6,
      Me + Father + Mother + Sister = 116 }.
)PL";

const char* kCinema = R"PL(% A seat seat(Row, Col) can be filled when no seat sharing a side with it is filled.
problem(Count) :-
    fill_rows(1, 3, 4, [seat(1, 2)], Seated),
    length(Seated, Count).
fill_rows(R, Rows, _, S, S) :- R > Rows, !.
fill_rows(R, Rows, Cols, S0, S) :-
    fill_cols(R, 1, Cols, S0, S1),
    R1 is R + 1,
    fill_rows(R1, Rows, Cols, S1, S).
fill_cols(_, C, Cols, S, S) :- C > Cols, !.
fill_cols(R, C, Cols, S0, S) :-
    ( can_sit(R, C, S0) -> S1 = [seat(R, C)|S0] ; S1 = S0 ),
    C1 is C + 1,
    fill_cols(R, C1, Cols, S1, S).
can_sit(R, C, S) :-
    \+ member(seat(R, C), S),
    \+ ( neighbour(R, C, R2, C2), member(seat(R2, C2), S) ).
neighbour(R, C, R2, C) :- R2 is R - 1.
neighbour(R, C, R2, C) :- R2 is R + 1.
neighbour(R, C, R, C2) :- C2 is C - 1.
neighbour(R, C, R, C2) :- C2 is C + 1.
)PL";

const char* kSumPlain = R"PL(% Each waitlist number goes into the leftmost 0 square.
problem(Sum) :-
    play([7, 3, -4, -2], [1, -2, 3, 0, 4, 0, -1, -1, 0, 0], Final),
    sum_list(Final, Sum).
play([], S, S).
play([W|Ws], S0, S) :- place(W, S0, S1), play(Ws, S1, S).
place(W, [0|T], [W|T]) :- !.
place(W, [H|T], [H|T1]) :- place(W, T, T1).
)PL";

const char* kSumPrev = R"PL(% A waitlist number equal to the square before the leftmost 0 is discarded.
problem(Sum) :-
    play([3, -2, 4, -1], [1, -2, 3, 0, 4, 0, -1, -1, 0, 0], Final),
    sum_list(Final, Sum).
play([], S, S).
play([W|Ws], S0, S) :- place(W, S0, S1), play(Ws, S1, S).
place(W, S0, S) :-
    once(nth0(I, S0, 0)),
    (   I > 0, I0 is I - 1, nth0(I0, S0, Prev), Prev =:= W
    ->  S = S0
    ;   set_nth0(I, S0, W, S)
    ).
set_nth0(0, [_|T], X, [X|T]) :- !.
set_nth0(I, [H|T], X, [H|T1]) :- I1 is I - 1, set_nth0(I1, T, X, T1).
)PL";

const char* kSumNeighbor = R"PL(% When the waitlist number equals the sum of the squares on both sides of the
% leftmost 0, those three squares become 0; otherwise the number fills the 0.
problem(Sum) :-
    play([7, 3, -4, -4, 3], [1, -2, 3, 0, 4, 0, -1, -1, 0, 0], Final),
    sum_list(Final, Sum).
play([], S, S).
play([W|Ws], S0, S) :- place(W, S0, S1), play(Ws, S1, S).
place(W, S0, S) :-
    once(nth0(I, S0, 0)),
    side(S0, I, -1, L),
    side(S0, I, 1, R),
    (   W =:= L + R
    ->  zero_around(S0, 0, I, S)
    ;   set_nth0(I, S0, W, S)
    ).
% A missing square counts as 0.
side(S, I, D, V) :- J is I + D, ( J >= 0, nth0(J, S, V0) -> V = V0 ; V = 0 ).
zero_around([], _, _, []).
zero_around([H|T], J, I, [V|T1]) :-
    ( abs(J - I) =< 1 -> V = 0 ; V = H ),
    J1 is J + 1,
    zero_around(T, J1, I, T1).
set_nth0(0, [_|T], X, [X|T]) :- !.
set_nth0(I, [H|T], X, [H|T1]) :- I1 is I - 1, set_nth0(I1, T, X, T1).
)PL";

}  // namespace

const std::vector<ProblemRecord>& fixtures() {
    static const std::vector<ProblemRecord> records = [] {
        std::vector<ProblemRecord> v;
        v.push_back(make("csp-four-digit", Category::ConstraintSatisfaction,
                         "I am a 4 digit number. My rightmost digit is not divisible by 2. The sum of my digits is 20, "
                         "and all my digits are in strictly decreasing order from left to right. One of my digits is 4 "
                         "times one of my other digits, and the difference between my 2 middle digits is more than 3. "
                         "What number am I?",
                         9821, std::nullopt, kFourDigit));
        v.push_back(make("csp-cinema-line", Category::ConstraintSatisfaction,
                         "In a line to enter a cinema, 4 people are standing between Bob and Alex. Chad's index in the "
                         "line is 1 after Bob's, he's standing right behind Bob considering the order of people left to "
                         "right. Frank is right behind Alex. Sam is right in front of Bob. There are 2 people between "
                         "Sam and Frank. If Bob is in the 7th person in the line, counting left to right, what is the "
                         "number of Alex?",
                         2, std::nullopt, kLine));
        v.push_back(make("mwp-birds-2", Category::MathWord,
                         "There are 2 trees (\"A\", \"B\") in a garden, and there are some birds in each tree. The "
                         "birds in tree A tell the birds in tree B that if 3 of you come to us, then our population "
                         "would be twice the population of tree B. And birds in tree B tell birds in tree A that if 2 "
                         "of you come to us, then our population would be more than the population in tree A by 1 "
                         "bird. What is the the number of birds in the 2 trees?",
                         27, 2, kBirds2));
        v.push_back(make("mwp-birds-3", Category::MathWord,
                         "There are 3 trees (\"A\", \"B\", \"C\") in a garden, and there are some birds in each tree. "
                         "The birds in tree A tell the other birds that if 2 birds from C and 1 bird from B come to our "
                         "tree, then our population would be double the population of birds in C. Birds in B think if "
                         "the birds do this move, then the population of A would be equal to their current "
                         "population. Birds in B suggest another move, if 1 bird from A and 3 birds from C come to our "
                         "tree, then our population would be double the population of A. What is the the number of "
                         "birds in the 3 trees?",
                         29, 3, kBirds3));
        v.push_back(make("mwp-birds-4", Category::MathWord,
                         "There are 4 trees (\"A\", \"B\", \"C\", \"D\") in a garden, and there are some birds in each "
                         "tree. The birds in D tell other birds that if 1 bird from C and 1 bird from A comes to us, "
                         "then our population would be half the population of A. Birds in A and C think that if they "
                         "do this move, then the sum of their population would be equal to the population of birds in "
                         "B. Birds in B suggest another move, if 5 birds from C and 5 birds from D come to our tree, "
                         "then our population would be twice the population of tree A. Birds in C think that if the "
                         "birds do this move, there would be 2 more birds in their tree relative to the number of "
                         "birds in tree D. What is the the number of birds in the 4 trees?",
                         47, 4, kBirds4));
        v.push_back(make("mwp-age", Category::MathWord,
                         "When I was half my current age, my father was 30. When I was 1/3 my current age, my mother "
                         "was 25. And when I was 1/6 of my current age, my sister was 7. If the sum of my age, my "
                         "sister's age, my father's age, and my mother's age is 116, then how old am I now?",
                         18, 4, kAge));
        v.push_back(make("ai-cinema-seats", Category::AlgorithmicInstructions,
                         "There's a cinema with 12 seats organized in 3 rows and 4 columns. Due to covid there's a "
                         "policy that a seat can be filled only if none of the seats right next to it in the same "
                         "column or the same row are not filled. If we place a person in the seat in the second column "
                         "of the first row and then start to fill the seats left to right, row by row, starting row "
                         "with 1, how many people can be seated in the cinema in total?",
                         6, 5, kCinema));
        v.push_back(make("ai-sum-it-up-plain", Category::AlgorithmicInstructions,
                         "In the \"sum it up\" game, there are 10 numbered squares and a queue of numbers, called the "
                         "waitlist. In this game the player must remove the first number on the waitlist and put it in "
                         "the first square numbered 0 from the left. If the squares start as 1, -2, 3, 0, 4, 0, -1, -1, "
                         "0, 0 and the waitlist is 7, 3, -4, -2, what's the final sum of all square numbers after the "
                         "waitlist is emptied?",
                         8, std::nullopt, kSumPlain));
        v.push_back(make("ai-sum-it-up-prev", Category::AlgorithmicInstructions,
                         "In the \"sum it up\" game, there are 10 numbered squares and a queue of numbers, called the "
                         "waitlist. Each round, the first number in the waitlist is removed and placed in the first 0 "
                         "square from the left. If the number in the square before the 0 square is equal to the "
                         "waitlist number, then the waitlist number clears out, and the 0 in the 0 square remains "
                         "unchanged in that round. Given the squares start as 1, -2, 3, 0, 4, 0, -1, -1, 0, 0 and the "
                         "waitlist is 3, -2, 4, -1, what's the final sum of all square numbers after the waitlist is "
                         "emptied?",
                         1, 2, kSumPrev));
        v.push_back(make("ai-sum-it-up-neighbors", Category::AlgorithmicInstructions,
                         "In the \"sum it up\" game, there are 10 numbered squares and a waitlist of numbers. Each "
                         "round involves removing the first waitlist number and placing it in the first 0 square from "
                         "the left. If the waitlist number equals the sum of the numbers in the squares before and "
                         "after the 0 square, then all three squares become 0. Given the squares start as 1, -2, 3, 0, "
                         "4, 0, -1, -1, 0, 0 and the waitlist is 7, 3, -4, -4, 3, what's the final sum of all square "
                         "numbers after the waitlist is emptied?",
                         -3, 3, kSumNeighbor));
        return v;
    }();
    return records;
}

}  // namespace prolite

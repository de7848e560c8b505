"""
How the market maker quotes
===========================

The quote pair has a fixed width around the mid price.  The centre is pulled
against the inventory by a cubic term.  Once that pull would cross the book,
the pair is shifted so its near edge sits one tick inside the book.
"""

from hftmarket.agents import HftState, hft_quotes

best_bid, best_ask, p_f, tick = 9_990.0, 10_010.0, 10_000.0, 0.1

print("position     buy       sell")
for position in (-100, -40, -20, 0, 20, 40, 100):
    hft = HftState(position=position, theta=0.002, skew_coeff=5e-8)
    buy, sell = hft_quotes(hft, best_bid, best_ask, p_f, tick)
    print(f"{position:8d}  {buy:9.1f}  {sell:9.1f}")

# A narrower width sits inside the normal agents' spread.
narrow = HftState(position=0, theta=0.0002, skew_coeff=5e-8)
print("theta 0.0002 at zero inventory:", hft_quotes(narrow, best_bid, best_ask, p_f, tick))

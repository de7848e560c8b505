"""
A tour of the order book
========================

Prices live on a tick grid.  Sells round up, buys round down, and a trade
always prints at the price of the order that was already waiting.
"""

from hftmarket.orderbook import BUY, SELL, OrderBook, round_to_tick, ticks_to_price

tick = 0.1
print("sell at 100.03 ->", round_to_tick(100.03, SELL, tick))
print("buy  at 100.03 ->", round_to_tick(100.03, BUY, tick))

# Prices inside the book are integer tick counts.
book = OrderBook(tick)
for t, (side, price) in enumerate([(SELL, 100_100), (SELL, 100_050), (BUY, 99_900), (BUY, 99_950)]):
    book.submit(book.new_order(owner=t, side=side, price=price, t=t), t)

print("best bid", ticks_to_price(book.best_bid(), tick), "best ask", ticks_to_price(book.best_ask(), tick))
print("depth within 50 ticks (buy, sell):", book.depth_within(50))

# A buy priced through the ask becomes a marketable order.
trades = book.submit(book.new_order(owner=9, side=BUY, price=100_200, t=4), 4)
print("trade at", ticks_to_price(trades[0].price, tick), "against owner", trades[0].sell_owner)

# Orders older than the effective period drop out on their own.
print("expired at t=3 with t_c=3:", book.expire(3, 3), "orders left:", len(book))

"""Logic module - theories, composed problem families and the bounded halting proxy."""

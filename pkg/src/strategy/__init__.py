"""Strategy module - player behaviors, honest and cheating."""

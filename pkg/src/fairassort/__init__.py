"""Fair assortment planning under the MNL choice model."""
